// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "cli/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lgest/error.hpp"

namespace lgest::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw ConfigError("config: invalid value \"" + text + "\" for " + key);
    }
    return value;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "0" || text == "false" || text == "no" || text == "off") {
        return false;
    }
    throw ConfigError("config: invalid boolean \"" + text + "\" for " + key);
}

FieldSpec size_field(std::string key, std::string help, std::size_t RunConfig::*member) {
    return {key, std::move(help), false,
            [member, key](RunConfig& c, const std::string& v) { c.*member = parse_number<std::size_t>(key, v); },
            [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

FieldSpec seed_field(std::string key, std::string help, std::uint64_t RunConfig::*member) {
    return {key, std::move(help), false,
            [member, key](RunConfig& c, const std::string& v) { c.*member = parse_number<std::uint64_t>(key, v); },
            [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

FieldSpec double_field(std::string key, std::string help, double RunConfig::*member) {
    return {key, std::move(help), false,
            [member, key](RunConfig& c, const std::string& v) { c.*member = parse_number<double>(key, v); },
            [member](const RunConfig& c) { return format_double(c.*member); }};
}

FieldSpec string_field(std::string key, std::string help, std::string RunConfig::*member) {
    return {key, std::move(help), false, [member](RunConfig& c, const std::string& v) { c.*member = v; },
            [member](const RunConfig& c) { return c.*member; }};
}

FieldSpec switch_field(std::string key, std::string help, bool RunConfig::*member) {
    return {key, std::move(help), true,
            [member, key](RunConfig& c, const std::string& v) { c.*member = parse_bool(key, v); },
            [member](const RunConfig& c) { return std::string(c.*member ? "1" : "0"); }};
}

std::vector<FieldSpec> make_fields() {
    using C = RunConfig;
    return {
        string_field("cube", "HSIC cube file", &C::cube),
        string_field("labels", "HSIL label file", &C::labels),
        switch_field("synthetic", "use the synthetic scene instead of cube/labels", &C::synthetic),
        size_field("synth_classes", "synthetic class count", &C::synth_classes),
        size_field("synth_width", "synthetic scene width", &C::synth_width),
        size_field("synth_height", "synthetic scene height", &C::synth_height),
        size_field("synth_bands", "synthetic band count", &C::synth_bands),
        double_field("synth_noise", "synthetic Gaussian noise sigma", &C::synth_noise),
        seed_field("synth_seed", "synthetic scene seed", &C::synth_seed),
        double_field("train_fraction", "per-class training fraction in (0,1)", &C::train_fraction),
        string_field("eval_set", "pixels scored by eval: test, train or all", &C::eval_set),
        size_field("patch_size", "odd patch side S", &C::patch_size),
        size_field("stem_channels", "DSAE stem width C0", &C::stem_channels),
        size_field("dsae_depth", "encoder/decoder stages", &C::dsae_depth),
        size_field("stem_kernel", "odd stem kernel size", &C::stem_kernel),
        size_field("fpn_levels", "pyramid levels", &C::fpn_levels),
        size_field("ciem_experts", "experts per RMoE layer", &C::ciem_experts),
        size_field("local_experts", "experts in the local group", &C::local_experts),
        size_field("global_experts", "experts in the global group", &C::global_experts),
        double_field("lambda", "local-branch loss weight", &C::lambda),
        double_field("beta", "global-branch loss weight", &C::beta),
        double_field("lr", "Adam learning rate", &C::lr),
        size_field("batch_size", "mini-batch size", &C::batch_size),
        size_field("epochs", "training epochs", &C::epochs),
        seed_field("seed", "initialization, split and shuffle seed", &C::seed),
        string_field("out_dir", "output directory", &C::out_dir),
        string_field("checkpoint", "checkpoint path (default <out_dir>/model.lgw)", &C::checkpoint),
        string_field("axis", "ablation axis: experts, patch or fraction", &C::axis),
        string_field("grid", "ablation grid, e.g. [2,2],[4,4] or 9,11,13", &C::grid),
        size_field("repeats", "runs per ablation point", &C::repeats),
        switch_field("inject_fault", "add a case with a wrong backward rule to gradcheck", &C::inject_fault),
    };
}

} // namespace

std::filesystem::path RunConfig::checkpoint_path() const {
    return checkpoint.empty() ? std::filesystem::path(out_dir) / "model.lgw" : std::filesystem::path(checkpoint);
}

LgestConfig RunConfig::model_config(std::size_t bands, std::size_t n_class) const {
    LgestConfig m;
    m.bands = bands;
    m.n_class = n_class;
    m.patch_size = patch_size;
    m.stem_channels = stem_channels;
    m.dsae_depth = dsae_depth;
    m.stem_kernel = stem_kernel;
    m.fpn_levels = fpn_levels;
    m.ciem_experts = ciem_experts;
    m.local_experts = local_experts;
    m.global_experts = global_experts;
    m.lambda = lambda;
    m.beta = beta;
    m.lr = lr;
    m.batch_size = batch_size;
    m.epochs = epochs;
    m.seed = seed;
    return m;
}

const std::vector<FieldSpec>& config_fields() {
    static const std::vector<FieldSpec> fields = make_fields();
    return fields;
}

void set_field(RunConfig& config, const std::string& key, const std::string& value) {
    for (const FieldSpec& f : config_fields()) {
        if (f.key == key) {
            f.set(config, value);
            return;
        }
    }
    throw ConfigError("config: unknown key \"" + key + "\"");
}

void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(number) + ": expected key=value");
        }
        try {
            set_field(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
        }
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    apply_config_text(config, text.str(), path.string());
}

std::string format_config(const RunConfig& config) {
    std::string out;
    for (const FieldSpec& f : config_fields()) {
        out += f.key + "=" + f.get(config) + "\n";
    }
    return out;
}

bool deterministic_requested() {
    const char* v = std::getenv("LGEST_DETERMINISTIC");
    return v != nullptr && std::string(v) != "0" && std::string(v) != "";
}

} // namespace lgest::cli
