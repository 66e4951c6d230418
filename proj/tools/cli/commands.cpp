// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "lgest/binary_io.hpp"
#include "lgest/checkpoint.hpp"
#include "lgest/error.hpp"
#include "lgest/gradcheck_suite.hpp"
#include "lgest/model.hpp"

namespace lgest::cli {

namespace {

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string config_header(const std::string& command) {
    return "# command=" + command + "\n# deterministic=1" +
           std::string(deterministic_requested() ? " (LGEST_DETERMINISTIC)" : "") + "\n";
}

std::vector<std::string> split_top_level(const std::string& grid) {
    std::vector<std::string> items;
    std::string current;
    int depth = 0;
    for (char ch : grid) {
        if (ch == '[') {
            ++depth;
        } else if (ch == ']') {
            --depth;
        }
        if (depth < 0) {
            throw ConfigError("grid: unbalanced brackets in \"" + grid + "\"");
        }
        if (ch == ',' && depth == 0) {
            items.push_back(current);
            current.clear();
        } else if (ch != ' ') {
            current += ch;
        }
    }
    if (depth != 0) {
        throw ConfigError("grid: unbalanced brackets in \"" + grid + "\"");
    }
    items.push_back(current);
    for (const std::string& item : items) {
        if (item.empty()) {
            throw ConfigError("grid: empty entry in \"" + grid + "\"");
        }
    }
    return items;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
    RunConfig scratch;
    set_field(scratch, "repeats", text);
    if (scratch.repeats == 0) {
        throw ConfigError(what + ": values must be positive, got \"" + text + "\"");
    }
    return scratch.repeats;
}

const PatchBatch& select_set(const PreparedData& data, const std::string& which) {
    if (which == "test") {
        return data.split.test;
    }
    if (which == "train") {
        return data.split.train;
    }
    if (which == "all") {
        return data.patches;
    }
    throw ConfigError("eval_set must be test, train or all, got \"" + which + "\"");
}

MetricsReport train_and_score(const RunConfig& config, std::ostream& err) {
    const PreparedData data = prepare_data(config, err);
    LgestModel model(config.model_config(data.patches.bands(), data.patches.n_class));
    fit(model, data.split.train);
    const Prediction pred = predict(model, data.split.test.patches);
    return summarize(confusion_matrix(data.split.test.labels, pred.classes, data.patches.n_class));
}

int dispatch(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& err) {
    if (command == "train") {
        return cmd_train(config, out, err);
    }
    if (command == "eval") {
        return cmd_eval(config, out, err);
    }
    if (command == "ablate") {
        return cmd_ablate(config, out, err);
    }
    if (command == "gradcheck") {
        return cmd_gradcheck(config, out);
    }
    return cmd_synth(config, out);
}

} // namespace

PreparedData prepare_data(const RunConfig& config, std::ostream& err) {
    PreparedData data;
    if (config.synthetic) {
        data.scene = synth_cube(config.synth_classes, config.synth_width, config.synth_height, config.synth_bands,
                                config.synth_noise, config.synth_seed);
    } else if (!config.cube.empty() && !config.labels.empty()) {
        data.scene = load_dataset(config.cube, config.labels);
    } else {
        throw ConfigError("no data: pass --cube and --labels, or --synthetic");
    }
    data.patches = extract_patches(normalize(data.scene.cube), data.scene.labels, config.patch_size);
    if (data.patches.size() == 0) {
        throw InputError("the label map has no labeled pixels");
    }
    data.split = split_train_test(data.patches, config.train_fraction, config.seed);
    for (std::size_t c : data.split.empty_classes) {
        err << "warning: class " << c + 1 << " has no labeled pixels and is skipped\n";
    }
    return data;
}

int cmd_synth(const RunConfig& config, std::ostream& out) {
    const Dataset scene = synth_cube(config.synth_classes, config.synth_width, config.synth_height,
                                     config.synth_bands, config.synth_noise, config.synth_seed);
    const std::filesystem::path cube =
        config.cube.empty() ? std::filesystem::path(config.out_dir) / "synth.hsic" : std::filesystem::path(config.cube);
    const std::filesystem::path labels = config.labels.empty()
                                             ? std::filesystem::path(config.out_dir) / "synth.hsil"
                                             : std::filesystem::path(config.labels);
    save_cube(cube, scene.cube);
    save_labels(labels, scene.labels);
    out << "cube=" << cube.string() << "\nlabels=" << labels.string() << "\n";
    return kExitOk;
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const PreparedData data = prepare_data(config, err);
    LgestModel model(config.model_config(data.patches.bands(), data.patches.n_class));
    out << "train_samples=" << data.split.train.size() << "\ntest_samples=" << data.split.test.size()
        << "\nparameters=" << model.parameters().parameter_count() << "\n";
    const TrainReport report = fit(model, data.split.train, [&](std::size_t epoch, double loss) {
        out << "epoch=" << epoch + 1 << " loss=" << fixed(loss) << "\n" << std::flush;
    });
    const std::filesystem::path dir(config.out_dir);
    save_checkpoint(config.checkpoint_path(), model.parameters());
    std::string csv = "epoch,loss\n";
    for (std::size_t e = 0; e < report.epoch_losses.size(); ++e) {
        csv += std::to_string(e + 1) + "," + exact(report.epoch_losses[e]) + "\n";
    }
    write_text(dir / "loss.csv", csv);
    write_text(dir / "run.cfg", config_header("train") + format_config(config));
    out << "checkpoint=" << config.checkpoint_path().string() << "\nsteps=" << report.steps
        << "\nseconds=" << fixed(report.seconds, 2) << "\n";
    return kExitOk;
}

int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const PreparedData data = prepare_data(config, err);
    const PatchBatch& scored = select_set(data, config.eval_set);
    LgestModel model(config.model_config(data.patches.bands(), data.patches.n_class));
    load_checkpoint(config.checkpoint_path(), model.parameters());

    const Prediction all = predict(model, data.patches.patches);
    std::vector<std::size_t> predicted;
    if (&scored == &data.patches) {
        predicted = all.classes;
    } else {
        predicted = predict(model, scored.patches).classes;
    }
    const MetricsReport report = summarize(confusion_matrix(scored.labels, predicted, data.patches.n_class));
    const std::string text = "eval_set=" + config.eval_set + "\n" + format_metrics(report);

    LabelMap map;
    map.width = data.scene.labels.width;
    map.height = data.scene.labels.height;
    map.n_class = data.scene.labels.n_class;
    map.labels.assign(map.width * map.height, 0);
    for (std::size_t i = 0; i < data.patches.size(); ++i) {
        const PixelCoord& p = data.patches.centers[i];
        map.labels[p.row * map.width + p.col] = static_cast<std::uint16_t>(all.classes[i] + 1);
    }
    const std::filesystem::path dir(config.out_dir);
    write_text(dir / "metrics.txt", text);
    io::write_file(dir / "map.ppm", render_class_map(map));
    out << text << "map=" << (dir / "map.ppm").string() << "\n";
    return kExitOk;
}

int cmd_ablate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    if (config.repeats == 0) {
        throw ConfigError("repeats must be positive");
    }
    std::vector<std::pair<std::string, RunConfig>> points;
    if (config.axis == "experts") {
        for (const ExpertPair& pair : parse_expert_grid(config.grid)) {
            RunConfig c = config;
            c.ciem_experts = pair[0];
            c.local_experts = pair[1];
            c.global_experts = pair[1];
            points.emplace_back("[" + std::to_string(pair[0]) + "," + std::to_string(pair[1]) + "]", c);
        }
    } else if (config.axis == "patch") {
        for (std::size_t s : parse_size_grid(config.grid)) {
            RunConfig c = config;
            c.patch_size = s;
            points.emplace_back(std::to_string(s), c);
        }
    } else if (config.axis == "fraction") {
        for (double f : parse_fraction_grid(config.grid)) {
            RunConfig c = config;
            c.train_fraction = f;
            std::ostringstream label;
            label << f;
            points.emplace_back(label.str(), c);
        }
    } else {
        throw ConfigError("axis must be experts, patch or fraction, got \"" + config.axis + "\"");
    }
    for (auto& [label, c] : points) {
        c.model_config(1, 2).validate();
    }

    const std::filesystem::path table = std::filesystem::path(config.out_dir) / ("ablation_" + config.axis + ".csv");
    std::string csv = std::string(kAblationHeader) + "\n";
    out << kAblationHeader << "\n";
    for (auto& [label, point] : points) {
        std::vector<double> oa, aa, kp;
        for (std::size_t r = 0; r < config.repeats; ++r) {
            RunConfig run = point;
            run.seed = config.seed + r;
            const MetricsReport m = train_and_score(run, err);
            oa.push_back(m.oa);
            aa.push_back(m.aa);
            kp.push_back(m.kappa);
        }
        const AblationRow row{config.axis, label, config.repeats, mean_std(oa), mean_std(aa), mean_std(kp)};
        const std::string line = format_ablation_row(row);
        out << line << "\n" << std::flush;
        csv += line + "\n";
        write_text(table, csv);
    }
    out << "table=" << table.string() << "\n";
    return kExitOk;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out) {
    std::vector<GradCheckCase> cases = gradient_suite();
    if (config.inject_fault) {
        cases.push_back(faulty_gradient_case());
    }
    const auto start = std::chrono::steady_clock::now();
    std::size_t failed = 0;
    run_gradient_suite(cases, {}, [&](const GradCheckResult& r) {
        failed += r.report.passed ? 0 : 1;
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-20s %s max_rel_err=%.3e tolerance=%.0e checked=%zu worst=%s\n",
                      r.name.c_str(), r.report.passed ? "pass" : "FAIL", r.report.max_rel_error, r.tolerance,
                      r.report.checked, r.report.worst.c_str());
        out << buf << std::flush;
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << "gradcheck cases=" << cases.size() << " failed=" << failed << " seconds=" << fixed(seconds, 2) << "\n";
    return failed == 0 ? kExitOk : kExitVerification;
}

std::vector<ExpertPair> parse_expert_grid(const std::string& grid) {
    std::vector<ExpertPair> pairs;
    for (const std::string& item : split_top_level(grid)) {
        if (item.front() == '[') {
            if (item.back() != ']') {
                throw ConfigError("experts grid: malformed entry \"" + item + "\"");
            }
            const std::string inner = item.substr(1, item.size() - 2);
            const auto comma = inner.find(',');
            if (comma == std::string::npos) {
                throw ConfigError("experts grid: expected [ciem,lges], got \"" + item + "\"");
            }
            pairs.push_back({parse_count(inner.substr(0, comma), "experts grid"),
                             parse_count(inner.substr(comma + 1), "experts grid")});
        } else {
            const std::size_t m = parse_count(item, "experts grid");
            pairs.push_back({m, m});
        }
    }
    return pairs;
}

std::vector<std::size_t> parse_size_grid(const std::string& grid) {
    std::vector<std::size_t> sizes;
    for (const std::string& item : split_top_level(grid)) {
        const std::size_t s = parse_count(item, "patch grid");
        if (s % 2 == 0) {
            throw ConfigError("patch grid: sizes must be odd, got " + item);
        }
        sizes.push_back(s);
    }
    return sizes;
}

std::vector<double> parse_fraction_grid(const std::string& grid) {
    std::vector<double> fractions;
    for (const std::string& item : split_top_level(grid)) {
        RunConfig scratch;
        set_field(scratch, "train_fraction", item);
        if (!(scratch.train_fraction > 0.0 && scratch.train_fraction < 1.0)) {
            throw ConfigError("fraction grid: values must lie in (0,1), got " + item);
        }
        fractions.push_back(scratch.train_fraction);
    }
    return fractions;
}

std::string format_ablation_row(const AblationRow& row) {
    const bool quote = row.value.find(',') != std::string::npos;
    return row.axis + "," + (quote ? "\"" + row.value + "\"" : row.value) + "," + std::to_string(row.repeats) + "," +
           fixed(row.oa[0]) + "," + fixed(row.oa[1]) + "," + fixed(row.aa[0]) + "," + fixed(row.aa[1]) + "," +
           fixed(row.kappa[0]) + "," + fixed(row.kappa[1]);
}

std::array<double, 2> mean_std(const std::vector<double>& values) {
    if (values.empty()) {
        return {0.0, 0.0};
    }
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    if (values.size() == 1) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"LGEST hyperspectral patch classifier"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"train", "Train on a cube or the synthetic scene and write a checkpoint"},
        {"eval", "Score a checkpoint and render the class map"},
        {"ablate", "Sweep experts, patch size or training fraction"},
        {"gradcheck", "Run the finite-difference gradient suite"},
        {"synth", "Write the synthetic scene as HSIC/HSIL files"},
    };
    std::string config_path;
    std::map<std::string, std::string> raw;
    std::map<std::string, std::vector<std::pair<CLI::App*, CLI::Option*>>> options;
    for (const auto& [name, description] : commands) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "flat key=value file applied before flags");
        for (const FieldSpec& f : config_fields()) {
            std::string flag = "--" + f.key;
            std::string dashed = f.key;
            std::replace(dashed.begin(), dashed.end(), '_', '-');
            if (dashed != f.key) {
                flag += ",--" + dashed;
            }
            CLI::Option* opt = f.is_switch ? sub->add_flag(flag, f.help) : sub->add_option(flag, raw[f.key], f.help);
            if (!f.is_switch) {
                opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            }
            options[f.key].emplace_back(sub, opt);
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    try {
        RunConfig config;
        if (!config_path.empty()) {
            apply_config_file(config, config_path);
        }
        for (const FieldSpec& f : config_fields()) {
            for (const auto& [sub, opt] : options[f.key]) {
                if (sub == chosen && opt->count() > 0) {
                    set_field(config, f.key, f.is_switch ? "1" : raw[f.key]);
                }
            }
        }
        out << config_header(command) << format_config(config) << std::flush;
        return dispatch(command, config, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args, out, err);
}

} // namespace lgest::cli
