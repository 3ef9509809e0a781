#include "netmor/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace netmor {

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void CsvWriter::add_row(const std::vector<double>& row) {
    if (row.size() != columns_.size())
        throw ValidationError("csv row width " + std::to_string(row.size()) +
                              " does not match header width " + std::to_string(columns_.size()));
    rows_.push_back(row);
}

std::string CsvWriter::str() const {
    std::ostringstream out;
    for (std::size_t c = 0; c < columns_.size(); ++c)
        out << (c ? "," : "") << columns_[c];
    out << "\n";
    for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << format_double(row[c]);
        out << "\n";
    }
    return out.str();
}

void CsvWriter::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw NumericalError("cannot write " + path.string());
    out << str();
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << v;
    return out.str();
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw NumericalError("cannot write " + path.string());
    out << "tool_version = " << m.tool_version << "\n";
    out << "config_hash = " << m.config_hash << "\n";
    for (const auto& a : m.artifacts) out << "artifact = " << a << "\n";
    for (const auto& [name, sec] : m.phase_seconds)
        out << "phase." << name << "_seconds = " << format_double(sec) << "\n";
    for (const auto& [key, value] : m.extra) out << key << " = " << value << "\n";
}

namespace {

void emit_matrix(std::ostream& out, const std::string& name, const Matrix& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            out << name << "," << i << "," << j << "," << format_double(M(i, j)) << "\n";
}

}  // namespace

void save_reduced_model(const tirka::ReducedModel& rom, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw NumericalError("cannot write " + path.string());
    out << "name,row,col,value\n";
    out << "meta,0,0," << rom.r << "\n";
    out << "meta,1,0," << (rom.converged ? 1 : 0) << "\n";
    emit_matrix(out, "Er", rom.Er);
    emit_matrix(out, "Ar", rom.Ar);
    emit_matrix(out, "Ahat", rom.Ahat);
    emit_matrix(out, "Bhat", rom.Bhat);
    emit_matrix(out, "Chat", rom.Chat);
    emit_matrix(out, "Dr", rom.Dr);
    emit_matrix(out, "V", rom.V);
    emit_matrix(out, "W", rom.W);
    emit_matrix(out, "F", rom.correction.F);
    emit_matrix(out, "Fbar", rom.correction.Fbar);
    for (Eigen::Index i = 0; i < rom.shifts.size(); ++i) {
        out << "shift_re," << i << ",0," << format_double(rom.shifts(i).real()) << "\n";
        out << "shift_im," << i << ",0," << format_double(rom.shifts(i).imag()) << "\n";
    }
    emit_matrix(out, "btan_re", rom.right_tangents.real());
    emit_matrix(out, "btan_im", rom.right_tangents.imag());
    emit_matrix(out, "ctan_re", rom.left_tangents.real());
    emit_matrix(out, "ctan_im", rom.left_tangents.imag());
    for (std::size_t i = 0; i < rom.history.size(); ++i)
        out << "history," << i << ",0," << format_double(rom.history[i]) << "\n";
}

tirka::ReducedModel load_reduced_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NumericalError("cannot read " + path.string());
    std::string line;
    std::getline(in, line);  // header
    struct Cell {
        Eigen::Index row, col;
        double value;
    };
    std::map<std::string, std::vector<Cell>> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string name, rs, cs, vs;
        std::getline(ls, name, ',');
        std::getline(ls, rs, ',');
        std::getline(ls, cs, ',');
        std::getline(ls, vs, ',');
        cells[name].push_back({std::stol(rs), std::stol(cs), std::stod(vs)});
    }
    auto to_matrix = [&](const std::string& name) {
        const auto it = cells.find(name);
        if (it == cells.end()) return Matrix();
        Eigen::Index rows = 0, cols = 0;
        for (const auto& c : it->second) {
            rows = std::max(rows, c.row + 1);
            cols = std::max(cols, c.col + 1);
        }
        Matrix M = Matrix::Zero(rows, cols);
        for (const auto& c : it->second) M(c.row, c.col) = c.value;
        return M;
    };

    tirka::ReducedModel rom;
    const auto meta = to_matrix("meta");
    rom.r = static_cast<Eigen::Index>(meta(0, 0));
    rom.converged = meta.rows() > 1 && meta(1, 0) != 0.0;
    rom.Er = to_matrix("Er");
    rom.Ar = to_matrix("Ar");
    rom.Ahat = to_matrix("Ahat");
    rom.Bhat = to_matrix("Bhat");
    rom.Chat = to_matrix("Chat");
    rom.Dr = to_matrix("Dr");
    rom.V = to_matrix("V");
    rom.W = to_matrix("W");
    rom.correction.F = to_matrix("F");
    rom.correction.Fbar = to_matrix("Fbar");
    const auto sre = to_matrix("shift_re");
    const auto sim = to_matrix("shift_im");
    rom.shifts.resize(sre.rows());
    for (Eigen::Index i = 0; i < sre.rows(); ++i) rom.shifts(i) = Complex(sre(i, 0), sim(i, 0));
    const auto bre = to_matrix("btan_re"), bim = to_matrix("btan_im");
    rom.right_tangents = bre.cast<Complex>() + Complex(0, 1) * bim.cast<Complex>();
    const auto cre = to_matrix("ctan_re"), cim = to_matrix("ctan_im");
    rom.left_tangents = cre.cast<Complex>() + Complex(0, 1) * cim.cast<Complex>();
    const auto hist = to_matrix("history");
    for (Eigen::Index i = 0; i < hist.rows(); ++i) rom.history.push_back(hist(i, 0));
    return rom;
}

}  // namespace netmor
