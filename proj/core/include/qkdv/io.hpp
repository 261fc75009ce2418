#pragma once

#include "qkdv/profile.hpp"
#include "qkdv/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qkdv {

// Snapshot files: one line of JSON header followed by raw little-endian
// float64 payload (interleaved re/im for spectral data). The header records
// time, grid parameters, payload count and an FNV-1a checksum, so files are
// language neutral and round-trip exactly.

std::uint64_t fnv1a64(const void* data, std::size_t bytes);
std::string fnv1a64_hex(const void* data, std::size_t bytes);

void write_profile_snapshot(const std::filesystem::path& path, const SpectralGrid& grid,
                            const ProfileSnapshot& snap);

struct LoadedSnapshot {
    ProfileSnapshot snap;
    double half_length = 0.0;
    int node_count = 0;
    int dealias_factor = 3;
    std::string checksum;
};

LoadedSnapshot read_profile_snapshot(const std::filesystem::path& path);

// Raw real samples (custom initial data).
std::vector<double> read_sample_file(const std::filesystem::path& path);
void write_sample_file(const std::filesystem::path& path, const std::vector<double>& samples);

} // namespace qkdv
