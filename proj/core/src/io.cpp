#include "qkdv/io.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace qkdv {

using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a64(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(const void* data, std::size_t bytes) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data, bytes)));
    return std::string(buf);
}

namespace {
void write_header_and_payload(const std::filesystem::path& path, ordered_json header,
                              const std::vector<double>& payload) {
    header["count"] = payload.size();
    header["endian"] = "LE";
    header["checksum"] =
        "fnv1a64:" + fnv1a64_hex(payload.data(), payload.size() * sizeof(double));
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path.string());
    const std::string h = header.dump();
    os << h << "\n";
    os.write(reinterpret_cast<const char*>(payload.data()),
             static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::pair<ordered_json, std::vector<double>> read_header_and_payload(
    const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path.string());
    std::string line;
    std::getline(is, line);
    ordered_json header = ordered_json::parse(line);
    const std::size_t count = header.at("count").get<std::size_t>();
    std::vector<double> payload(count);
    is.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw std::runtime_error("short read: " + path.string());
    const std::string want = header.at("checksum").get<std::string>();
    const std::string got =
        "fnv1a64:" + fnv1a64_hex(payload.data(), payload.size() * sizeof(double));
    if (want != got) throw std::runtime_error("checksum mismatch: " + path.string());
    return {std::move(header), std::move(payload)};
}
} // namespace

void write_profile_snapshot(const std::filesystem::path& path, const SpectralGrid& grid,
                            const ProfileSnapshot& snap) {
    ordered_json h;
    h["kind"] = "profile";
    h["time"] = snap.t;
    h["L"] = grid.half_length();
    h["N"] = grid.node_count();
    h["p"] = grid.dealias_factor();
    h["run_id"] = snap.run_id;
    h["step_index"] = snap.step_index;
    std::vector<double> payload(2 * snap.fhat.size());
    for (size_t j = 0; j < snap.fhat.size(); ++j) {
        payload[2 * j] = snap.fhat[j].real();
        payload[2 * j + 1] = snap.fhat[j].imag();
    }
    write_header_and_payload(path, std::move(h), payload);
}

LoadedSnapshot read_profile_snapshot(const std::filesystem::path& path) {
    auto [h, payload] = read_header_and_payload(path);
    LoadedSnapshot out;
    out.snap.t = h.at("time").get<double>();
    out.snap.run_id = h.value("run_id", "");
    out.snap.step_index = h.value("step_index", 0L);
    out.half_length = h.at("L").get<double>();
    out.node_count = h.at("N").get<int>();
    out.dealias_factor = h.value("p", 3);
    out.checksum = h.at("checksum").get<std::string>();
    out.snap.fhat.resize(payload.size() / 2);
    for (size_t j = 0; j < out.snap.fhat.size(); ++j)
        out.snap.fhat[j] = complexd(payload[2 * j], payload[2 * j + 1]);
    return out;
}

std::vector<double> read_sample_file(const std::filesystem::path& path) {
    auto [h, payload] = read_header_and_payload(path);
    if (h.at("kind").get<std::string>() != "samples")
        throw std::runtime_error("not a sample file: " + path.string());
    return payload;
}

void write_sample_file(const std::filesystem::path& path, const std::vector<double>& samples) {
    ordered_json h;
    h["kind"] = "samples";
    write_header_and_payload(path, std::move(h), samples);
}

} // namespace qkdv
