#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "netmor/tirka.hpp"
#include "netmor/types.hpp"

namespace netmor {

/// Shortest round-trip decimal representation, locale independent.
std::string format_double(double v);

/// Header plus rows of doubles; every row must match the header width.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}
    void add_row(const std::vector<double>& row);
    void write(const std::filesystem::path& path) const;
    [[nodiscard]] std::string str() const;

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t v);

struct RunManifest {
    std::string tool_version;
    std::string config_hash;
    std::vector<std::string> artifacts;
    std::vector<std::pair<std::string, double>> phase_seconds;
    std::vector<std::pair<std::string, std::string>> extra;
    bool reduction_converged = true;
};

void write_manifest(const RunManifest& m, const std::filesystem::path& path);

/// Long-format bundle (name,row,col,value) carrying every matrix of the
/// reduced model plus shifts, tangents, and the convergence history.
void save_reduced_model(const tirka::ReducedModel& rom, const std::filesystem::path& path);

/// Restores the matrices and metadata; the projected nonlinear term is
/// reconstructed by the caller from the stored bases and the full model.
tirka::ReducedModel load_reduced_model(const std::filesystem::path& path);

}  // namespace netmor
