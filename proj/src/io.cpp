#include "chronoreg/io.hpp"

#include "chronoreg/error.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace chronoreg {

namespace {

constexpr const char* kFormat = "chronoreg.gridfunction";
constexpr int kVersion = 1;

std::uint64_t to_little(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
        return r;
    }
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& bin_path) {
    auto p = bin_path;
    p.replace_extension(".json");
    return p;
}

void save_grid_function(const GridFunction& f, const std::filesystem::path& bin_path) {
    const Grid& g = f.grid();
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw ConfigError("cannot open " + bin_path.string() + " for writing");
    for (const cplx& v : f.values()) {
        for (double part : {v.real(), v.imag()}) {
            const std::uint64_t word = to_little(std::bit_cast<std::uint64_t>(part));
            bin.write(reinterpret_cast<const char*>(&word), sizeof(word));
        }
    }
    nlohmann::json meta = {
        {"format", kFormat}, {"version", kVersion}, {"d", g.d()},     {"n_t", g.n_t()},
        {"n_x", g.n_x()},    {"L_t", g.L_t()},     {"L_x", g.L_x()}, {"N", g.N()},
        {"count", f.values().size()},
        {"layout", "t,x_1..x_d,component; complex as (re, im) float64 little-endian"},
    };
    std::ofstream side(sidecar_path(bin_path));
    if (!side) throw ConfigError("cannot open sidecar for " + bin_path.string());
    side << meta.dump(2) << "\n";
}

GridFunction load_grid_function(const std::filesystem::path& bin_path) {
    std::ifstream side(sidecar_path(bin_path));
    if (!side) throw ConfigError("missing sidecar " + sidecar_path(bin_path).string());
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed sidecar: ") + e.what());
    }
    if (meta.value("format", "") != kFormat || meta.value("version", 0) != kVersion)
        throw ConfigError("sidecar is not a chronoreg grid function (version 1)");
    const Grid g(meta.at("d").get<int>(), meta.at("n_t").get<int>(), meta.at("n_x").get<int>(),
                 meta.at("L_t").get<double>(), meta.at("L_x").get<double>(), meta.at("N").get<int>());
    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw ConfigError("cannot open " + bin_path.string());
    std::vector<cplx> values(g.size());
    for (auto& v : values) {
        double parts[2];
        for (double& part : parts) {
            std::uint64_t word = 0;
            if (!bin.read(reinterpret_cast<char*>(&word), sizeof(word)))
                throw ConfigError("binary container " + bin_path.string() + " is truncated");
            part = std::bit_cast<double>(to_little(word));
        }
        v = {parts[0], parts[1]};
    }
    if (bin.peek() != std::char_traits<char>::eof())
        throw ConfigError("binary container " + bin_path.string() + " has trailing bytes");
    return GridFunction(g, std::move(values));
}

}  // namespace chronoreg
