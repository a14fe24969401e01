// q3sim: command-line front end for the payload simulator.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "q3/error.hpp"
#include "q3/report.hpp"
#include "q3/runner.hpp"
#include "q3/scenario.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Options {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string out = "q3out";
    std::string format = "json";
    bool strict = false;
    std::string input;
};

void summarize(const q3::Report& rep) {
    const auto& r = rep.results();
    const std::string exp = rep.document.at("experiment").get<std::string>();
    auto show = [](const char* label, const nlohmann::ordered_json& m) {
        std::cout << label << " = " << m.at("value").get<double>() << " +- " << m.at("error").get<double>() << "\n";
    };
    if (exp == "g2") {
        show("g2(0)", r.at("g2_at_zero"));
    } else if (exp == "born" || exp == "analyze") {
        show("epsilon", r.at("epsilon"));
        show("kappa", r.at("kappa"));
    } else if (exp == "calibrate") {
        std::cout << "achieved power fraction = " << r.at("achieved_power_fraction").get<double>() << "\n";
    } else if (exp == "passes") {
        for (const auto& st : r.at("stations")) {
            const auto& s = st.at("statistics");
            std::cout << st.at("name").get<std::string>() << ": " << s.at("passes_per_day").get<double>()
                      << " passes/day, " << s.at("minutes_per_day").get<double>() << " min/day\n";
        }
    } else if (exp == "power") {
        for (const auto& row : r.at("energy"))
            std::cout << "duty " << row.at("duty").get<double>() << ": margin " << row.at("margin_wh").get<double>()
                      << " Wh/orbit\n";
    }
}

int execute(q3::Experiment exp, const Options& o) {
    try {
        nlohmann::ordered_json doc = nlohmann::ordered_json::object();
        if (!o.scenario.empty()) {
            try {
                doc = q3::load_scenario_document(o.scenario);
            } catch (const q3::Error& e) {
                if (e.kind() == q3::ErrorKind::Io) throw q3::ValidationError(e.what());
                throw;
            }
            if (!doc.is_object()) throw q3::ValidationError(o.scenario + ": expected a JSON object");
        }
        // Command-line overrides land in the document so the echo shows them.
        doc["experiment"] = q3::to_string(exp);
        if (o.seed) doc["seed"] = *o.seed;
        if (o.strict) doc["strict_mission"] = true;
        if (!o.input.empty()) doc["input"] = o.input;
        const auto s = q3::scenario_from_json(doc);
        const auto format = q3::parse_format(o.format);
        const auto rep = q3::run(s);
        const auto files = q3::emit_report(rep, o.out, format);
        summarize(rep);
        for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
        return 0;
    } catch (const q3::ValidationError& e) {
        std::cerr << "q3sim: invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const q3::Error& e) {
        std::cerr << "q3sim: " << q3::to_string(e.kind()) << " error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "q3sim: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Digital twin of the quantum-photonics payload"};
    app.set_version_flag("--version", std::string(q3::tool_version()));
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;

    struct Sub {
        const char* name;
        q3::Experiment exp;
        const char* help;
    };
    const Sub subs[] = {
        {"g2", q3::Experiment::G2, "Second-order correlation through the HBT tap"},
        {"born", q3::Experiment::Born, "Third-order interference test over all 8 blocking configurations"},
        {"calibrate", q3::Experiment::Calibrate, "Crosstalk estimate and phase calibration"},
        {"passes", q3::Experiment::Passes, "Ground-station pass prediction"},
        {"power", q3::Experiment::Power, "Per-orbit energy budget"},
        {"analyze", q3::Experiment::Analyze, "Sorkin estimators on an external count table"},
    };
    std::optional<q3::Experiment> chosen;
    for (const auto& sub : subs) {
        auto* cmd = app.add_subcommand(sub.name, sub.help);
        cmd->add_option("--scenario", opt.scenario, "Scenario JSON file")->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed, "Override the scenario seed");
        cmd->add_option("--out", opt.out, "Output directory")->capture_default_str();
        cmd->add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
        cmd->add_flag("--strict-mission", opt.strict, "Enforce the mission altitude and inclination windows");
        if (sub.exp == q3::Experiment::Analyze)
            cmd->add_option("--input", opt.input, "Count table CSV (config,counts,shots)")->required()->check(CLI::ExistingFile);
        cmd->callback([&, e = sub.exp, cmd] {
            chosen = e;
            if (cmd->count("--seed")) opt.seed = seed;
        });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }
    return execute(*chosen, opt);
}
