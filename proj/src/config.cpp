// SPDX-License-Identifier: Apache-2.0
#include "relight/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

namespace relight {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("expected a number, got '" + v + "'");
    return out;
}

template <typename Int>
Int to_int(const std::string& v) {
    Int out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigError("expected true or false, got '" + v + "'");
}

void apply(RunConfig& cfg, const std::string& key, const std::string& v) {
    auto& p = cfg.pipeline;
    if (key == "intensity_threshold") {
        p.intensity_threshold = to_double(v);
    } else if (key == "steps") {
        p.steps = to_int<int>(v);
    } else if (key == "seed") {
        p.seed = to_int<std::uint64_t>(v);
    } else if (key == "adain") {
        p.adain_enabled = to_bool(v);
    } else if (key == "adain_channels") {
        if (v == "all") {
            p.adain_channels.reset();
        } else if (v == "none") {
            p.adain_channels = std::vector<int>{};
        } else {
            std::vector<int> ch;
            for (const auto& item : split_list(v)) ch.push_back(to_int<int>(item));
            p.adain_channels = ch;
        }
    } else if (key == "injection") {
        p.injection = to_bool(v);
    } else if (key == "tap.feature_kind") {
        p.tap.feature_kind = parse_feature_kind(v);
    } else if (key == "tap.blocks") {
        std::set<BlockPosition> scope;
        for (const auto& item : split_list(v)) scope.insert(parse_block_position(item));
        if (scope.empty()) throw ConfigError("tap.blocks must name at least one block");
        p.tap.block_scope = scope;
    } else if (key == "tap.layers") {
        if (v == "all") {
            p.tap.layer_filter.reset();
        } else {
            const auto items = split_list(v);
            p.tap.layer_filter = std::set<std::string>(items.begin(), items.end());
        }
    } else if (key == "tap.target") {
        p.tap.target = parse_injection_target(v);
    } else if (key == "feature_source") {
        p.feature_source = parse_feature_source(v);
    } else if (key == "feature_input") {
        p.feature_input = parse_feature_input(v);
    } else if (key == "feature_threshold") {
        p.feature_threshold = to_double(v);
    } else if (key == "decoder") {
        p.decoder = parse_decoder_variant(v);
    } else if (key == "schedule") {
        cfg.schedule = parse_schedule_kind(v);
    } else if (key == "backend") {
        if (v != "toy" && v != "external") throw ConfigError("unknown backend '" + v + "' (toy|external)");
        cfg.backend = v;
    } else if (key == "backend_seed") {
        cfg.backend_seed = to_int<std::uint64_t>(v);
    } else if (key == "workers") {
        cfg.workers = to_int<int>(v);
        if (cfg.workers < 0) throw ConfigError("workers must be >= 0");
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

std::string join(const auto& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += ',';
        if constexpr (std::is_same_v<std::decay_t<decltype(item)>, std::string>) {
            out += item;
        } else if constexpr (std::is_same_v<std::decay_t<decltype(item)>, int>) {
            out += std::to_string(item);
        } else {
            out += to_string(item);
        }
    }
    return out;
}

}  // namespace

RunConfig parse_config(std::istream& is, RunConfig base) {
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto t = trim(line.substr(0, line.find('#')));
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(t.substr(0, eq));
        const auto value = trim(t.substr(eq + 1));
        try {
            apply(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    base.pipeline.validate();
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config " + path.string());
    try {
        return parse_config(is, std::move(base));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_config(std::ostream& os, const RunConfig& cfg) {
    const auto& p = cfg.pipeline;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", p.intensity_threshold);
    os << "intensity_threshold = " << buf << '\n';
    os << "steps = " << p.steps << '\n';
    os << "seed = " << p.seed << '\n';
    os << "adain = " << (p.adain_enabled ? "true" : "false") << '\n';
    os << "adain_channels = "
       << (!p.adain_channels ? std::string("all") : p.adain_channels->empty() ? std::string("none") : join(*p.adain_channels))
       << '\n';
    os << "injection = " << (p.injection ? "true" : "false") << '\n';
    os << "tap.feature_kind = " << to_string(p.tap.feature_kind) << '\n';
    os << "tap.blocks = " << join(p.tap.block_scope) << '\n';
    os << "tap.layers = " << (p.tap.layer_filter ? join(*p.tap.layer_filter) : std::string("all")) << '\n';
    os << "tap.target = " << to_string(p.tap.target) << '\n';
    os << "feature_source = " << to_string(p.feature_source) << '\n';
    os << "feature_input = " << to_string(p.feature_input) << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", p.feature_threshold);
    os << "feature_threshold = " << buf << '\n';
    os << "decoder = " << to_string(p.decoder) << '\n';
    os << "schedule = " << to_string(cfg.schedule) << '\n';
    os << "backend = " << cfg.backend << '\n';
    os << "backend_seed = " << cfg.backend_seed << '\n';
    os << "workers = " << cfg.workers << '\n';
}

}  // namespace relight
