#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "concl/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using namespace concl;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitBlowup = 3;
constexpr int kExitInvariant = 4;

int load_config(const std::string& path, scenario::ScenarioConfig& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read config file '" << path << "'\n";
        return kExitParse;
    }
    std::ostringstream text;
    text << in.rdbuf();
    const scenario::ParseResult parsed = scenario::parse_config(text.str());
    if (!parsed.ok()) {
        for (const auto& issue : parsed.issues) {
            std::cerr << path << ":";
            if (issue.line > 0) std::cerr << issue.line << ":";
            std::cerr << " " << issue.message << "\n";
        }
        return kExitParse;
    }
    out = parsed.config;
    return kExitOk;
}

int run_config(scenario::ScenarioConfig cfg) {
    try {
        const scenario::RunOutcome outcome = scenario::run(cfg);
        for (const auto& f : outcome.files) std::cout << "wrote " << f << "\n";
        if (outcome.exit_code != 0)
            std::cerr << "error: " << outcome.message << "\n";
        return outcome.exit_code;
    } catch (const blowup_error& e) {
        std::cerr << "blow-up: " << e.what() << "\n";
        return kExitBlowup;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvariant;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulator for mass/edge-weight dynamics on co-evolving graphs"};
    app.require_subcommand(1);

    std::string config_path;
    auto* cmd_run = app.add_subcommand("run", "run a scenario config file");
    cmd_run->add_option("config", config_path, "path to a .cfg file")->required();

    std::string preset_name;
    std::string out_dir = "out";
    auto* cmd_preset = app.add_subcommand("preset", "run a named preset");
    cmd_preset->add_option("name", preset_name, "preset name")->required();
    cmd_preset->add_option("--out", out_dir, "output directory");

    std::string scaffold_name;
    std::string scaffold_dir = ".";
    auto* cmd_scaffold =
        app.add_subcommand("scaffold", "emit a preset as a sample config file");
    cmd_scaffold->add_option("name", scaffold_name, "preset name")->required();
    cmd_scaffold->add_option("--out", scaffold_dir, "target directory");

    std::string verify_path;
    auto* cmd_verify = app.add_subcommand(
        "verify", "run the invariant suites for a config and print a table");
    cmd_verify->add_option("config", verify_path, "path to a .cfg file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    if (cmd_run->parsed()) {
        scenario::ScenarioConfig cfg;
        const int rc = load_config(config_path, cfg);
        if (rc != kExitOk) return rc;
        return run_config(std::move(cfg));
    }

    if (cmd_preset->parsed()) {
        std::string text;
        try {
            text = scenario::preset_text(preset_name);
        } catch (const error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitParse;
        }
        const scenario::ParseResult parsed = scenario::parse_config(text);
        if (!parsed.ok()) {
            std::cerr << "error: preset '" << preset_name << "' is invalid\n";
            return kExitParse;
        }
        scenario::ScenarioConfig cfg = parsed.config;
        cfg.output.path = out_dir;
        return run_config(std::move(cfg));
    }

    if (cmd_scaffold->parsed()) {
        std::string text;
        try {
            text = scenario::preset_text(scaffold_name);
        } catch (const error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitParse;
        }
        fs::create_directories(scaffold_dir);
        const fs::path target = fs::path(scaffold_dir) / (scaffold_name + ".cfg");
        std::ofstream out(target, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << target.string() << "\n";
            return kExitParse;
        }
        out << text;
        std::cout << "wrote " << target.string() << "\n";
        return kExitOk;
    }

    // verify
    scenario::ScenarioConfig cfg;
    const int rc = load_config(verify_path, cfg);
    if (rc != kExitOk) return rc;
    try {
        const scenario::VerifyOutcome outcome = scenario::verify(cfg);
        for (const auto& row : outcome.rows) {
            std::string dots(std::max<std::size_t>(2, 44 - row.name.size()), '.');
            std::cout << row.name << " " << dots << " "
                      << (row.pass ? "PASS" : "FAIL");
            if (!row.pass && !row.detail.empty())
                std::cout << "  (" << row.detail << ")";
            std::cout << "\n";
        }
        return outcome.all_pass ? kExitOk : kExitInvariant;
    } catch (const blowup_error& e) {
        std::cerr << "blow-up: " << e.what() << "\n";
        return kExitBlowup;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvariant;
    }
}
