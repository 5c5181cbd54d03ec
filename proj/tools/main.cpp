#include "hpcpred/config.hpp"
#include "hpcpred/error.hpp"
#include "hpcpred/experiment.hpp"
#include "hpcpred/synth.hpp"
#include "hpcpred/trace.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace hpcpred;

struct CommonOptions {
    std::string config;
    std::string trace;
    std::string output;
    std::int64_t processors = -1;
    std::vector<std::string> sets;
};

void add_common(CLI::App* app, CommonOptions& o) {
    app->add_option("-c,--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("-t,--trace", o.trace, "SWF trace (overrides `trace` from the config)");
    app->add_option("-o,--output", o.output, "directory for the CSV reports");
    app->add_option("-p,--processors", o.processors, "machine size (overrides the trace header)");
    app->add_option("-s,--set", o.sets, "override one config key, as key=value (repeatable)");
}

ExperimentConfig make_config(const CommonOptions& o, std::vector<std::pair<std::string, std::string>> extra = {}) {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects key=value, got '" + s + "'");
        }
        overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!o.trace.empty()) {
        overrides.emplace_back("trace", o.trace);
    }
    if (!o.output.empty()) {
        overrides.emplace_back("output", o.output);
    }
    if (o.processors >= 0) {
        overrides.emplace_back("processors", std::to_string(o.processors));
    }
    overrides.insert(overrides.end(), extra.begin(), extra.end());
    return load_config(o.config, overrides);
}

void print(const std::vector<std::string>& lines) {
    for (const auto& l : lines) {
        std::cout << l << '\n';
    }
}

int validate(const CommonOptions& o) {
    const auto cfg = make_config(o);
    const auto t = load_trace(cfg);
    std::cout << t.name << ": " << t.parsedJobs << " records, " << t.jobs.size() << " completed, "
              << t.rejected.size() << " rejected, P = " << t.processors << '\n';
    auto show = [](const char* name, IndexRange r) {
        std::cout << "  " << name << " [" << r.begin << ", " << r.end << ")\n";
    };
    show("history", t.split.history);
    show("validation", t.split.validation);
    show("test", t.split.test);
    if (!t.rejected.empty()) {
        std::filesystem::create_directories(cfg.outputDir);
        const auto path = std::filesystem::path(cfg.outputDir) / "rejections.csv";
        std::ofstream out(path);
        write_rejections_csv(out, t.rejected);
        std::cout << "rejections written to " << path.string() << '\n';
    }
    return 0;
}

int synthesize(const std::string& kind, const std::string& output, std::uint64_t seed) {
    Trace t;
    if (kind == "heavy-load") {
        t = synth::heavy_load_trace(seed);
    } else if (kind == "diurnal") {
        t = synth::diurnal_trace(seed);
    } else if (kind == "linear-load") {
        synth::LinearLoadParams p;
        p.seed = seed;
        t = synth::linear_load_workload(p).trace;
    } else if (kind == "size-wait") {
        synth::SizeWaitParams p;
        p.seed = seed;
        t = synth::size_dependent_wait_trace(p);
    } else {
        throw ConfigError("unknown workload '" + kind + "'");
    }
    if (output.empty() || output == "-") {
        write_swf(std::cout, t);
    } else {
        std::ofstream out(output);
        if (!out) {
            throw Error("cannot write " + output);
        }
        write_swf(out, t);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Queue-wait and execution-time prediction with job molding and delayed submission"};
    app.require_subcommand(1);

    CommonOptions common;
    auto* validateCmd = app.add_subcommand("validate", "check a config and trace, report the split");
    auto* waitCmd = app.add_subcommand("predict-wait", "online queue-wait prediction over the test split");
    auto* execCmd = app.add_subcommand("predict-exec", "execution-time rangeSets over the test split");
    auto* simCmd = app.add_subcommand("simulate", "replay the trace through EASY under a submission policy");
    auto* tuneCmd = app.add_subcommand("tune", "coordinate-descent sweep of the tune.* grids");
    auto* reportCmd = app.add_subcommand("report", "every mode on one trace plus table-shaped summaries");
    for (auto* c : {validateCmd, waitCmd, execCmd, simCmd, tuneCmd, reportCmd}) {
        add_common(c, common);
    }
    std::string policyName = "baseline";
    simCmd->add_option("--policy", policyName, "baseline, mold or delay")
        ->check(CLI::IsMember({"baseline", "mold", "delay"}));

    std::string synthKind;
    std::string synthOut;
    std::uint64_t synthSeed = 0;
    bool seedGiven = false;
    auto* synthCmd = app.add_subcommand("synth", "write a synthetic SWF workload");
    synthCmd->add_option("kind", synthKind, "heavy-load, diurnal, linear-load or size-wait")->required();
    synthCmd->add_option("-o,--output", synthOut, "output file (stdout when omitted)");
    synthCmd->add_option("--seed", synthSeed, "generator seed")->each([&](const std::string&) { seedGiven = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        if (validateCmd->parsed()) {
            return validate(common);
        }
        if (synthCmd->parsed()) {
            if (!seedGiven) {
                synthSeed = synthKind == "diurnal" ? 23 : synthKind == "heavy-load" ? 11 : synthKind == "size-wait" ? 7 : 1;
            }
            return synthesize(synthKind, synthOut, synthSeed);
        }
        if (reportCmd->parsed()) {
            print(run_report(make_config(common)));
            return 0;
        }
        std::string mode;
        if (waitCmd->parsed()) {
            mode = "predict-wait";
        } else if (execCmd->parsed()) {
            mode = "predict-exec";
        } else if (simCmd->parsed()) {
            mode = "simulate-" + policyName;
        } else {
            mode = "tune";
        }
        print(run_experiment(make_config(common, {{"mode", mode}})));
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "hpcpred: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "hpcpred: trace error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "hpcpred: " << e.what() << '\n';
        return 1;
    }
}
