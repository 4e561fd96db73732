#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "jumpom/levy_fpe.hpp"
#include "jumpom/sde_sim.hpp"

namespace jumpom::io {

/// Columns t, x1..xd, jump_flag. jump_flag is 1 on a row whose preceding
/// interval contains at least one accepted jump.
std::string path_csv(const DiscretePath& path);
void write_path_csv(const std::filesystem::path& file, const DiscretePath& path);
/// Reads t, x1..xd and an optional trailing jump_flag column (ignored).
DiscretePath read_path_csv(const std::filesystem::path& file);

/// Binary layout, little-endian:
///   "JOMG" magic, u32 version, u32 dim, u32 nodes, f64 lo[dim], f64 hi[dim],
///   f64 x0[dim], f64 epsilon, u64 n_slices, f64 times[n_slices],
///   f64 clipped[n_slices], then each slice as row-major f64[nodes^dim].
void write_density_grid(const std::filesystem::path& file, const DensityField& field);
DensityField read_density_grid(const std::filesystem::path& file);
/// One row per node and slice: t, x1..xd, p.
std::string density_csv(const DensityField& field, const std::vector<std::size_t>& slices);

/// Columns t, path, x1..xd.
std::string marginals_csv(const std::vector<double>& times, const std::vector<Eigen::MatrixXd>& snapshots);

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);
void write_json(const std::filesystem::path& file, const nlohmann::json& j);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace jumpom::io
