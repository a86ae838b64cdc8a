#include "demo_configs.hpp"

#include "vnls/run.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::vector<std::string> checks;
    std::string grid;
    double dt = 0.0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw vnls::Error(vnls::ErrorKind::Config, "cannot read config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

vnls::RunConfig load(const Options& o, bool checks_given) {
    vnls::RunConfig cfg = vnls::parse_config(read_file(o.config));
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (!o.grid.empty()) cfg.grid = vnls::parse_grid(o.grid);
    if (checks_given) {
        const auto& known = vnls::known_checks();
        for (const auto& id : o.checks) {
            if (std::find(known.begin(), known.end(), id) == known.end()) {
                throw vnls::Error(vnls::ErrorKind::Config, "--check: unknown check id \"" + id + "\"");
            }
        }
        cfg.checks = o.checks;
    }
    if (o.dt > 0.0) {
        vnls::OracleSpec spec = cfg.oracle.value_or(vnls::OracleSpec{});
        spec.dt = o.dt;
        cfg.oracle = spec;
    }
    return cfg;
}

void report(const vnls::RunManifest& m, const fs::path& dir) {
    std::cout << m.json["command"].get<std::string>() << ": " << (m.pass ? "pass" : "FAIL") << " (" << dir.string()
              << "/manifest.json)\n";
    if (!m.json["error"].is_null()) std::cerr << "error: " << m.json["error"]["message"].get<std::string>() << '\n';
    if (m.json.contains("checks")) {
        for (const auto& [suite, s] : m.json["checks"].items()) {
            if (!s["pass"].get<bool>()) std::cerr << "  failed: " << suite << ' ' << s["failures"].dump() << '\n';
        }
    }
}

int run_demo(const std::string& out) {
    const fs::path root = out.empty() ? fs::path("demo") : fs::path(out);
    int code = 0;
    for (auto [name, text] : {std::pair{"one_soliton", demo::one_soliton}, std::pair{"two_soliton", demo::two_soliton}}) {
        const fs::path dir = root / name;
        fs::create_directories(dir);
        std::ofstream(dir / "config.json", std::ios::binary) << text;
        const vnls::RunConfig cfg = vnls::parse_config(text);
        const auto m = vnls::run(cfg, vnls::Command::Verify, dir);
        report(m, dir);
        code = std::max(code, m.exit_code);
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Construct NLS solutions from vessels, verify them and cross-check with a split-step solver"};
    app.set_version_flag("--version", std::string(vnls::kVersion));
    app.require_subcommand(1);

    Options o;
    struct Sub {
        const char* name;
        const char* help;
        vnls::Command command;
    };
    const Sub subs[] = {
        {"build-check", "construct the vessel and run the pointwise identity suite", vnls::Command::BuildCheck},
        {"field", "export beta on the grid (and tau along t = t_min)", vnls::Command::Field},
        {"verify", "field export plus every selected residual check", vnls::Command::Verify},
        {"oracle", "cross-validate beta against the split-step solver", vnls::Command::Oracle},
    };
    std::vector<std::pair<CLI::App*, vnls::Command>> commands;
    CLI::Option* check_opt = nullptr;
    std::vector<CLI::Option*> check_opts;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory (overrides output.dir)");
        check_opt = sub->add_option("--check", o.checks, "check ids to run (replaces the config list)");
        check_opts.push_back(check_opt);
        sub->add_option("--grid", o.grid, "grid override x0:x1:nx,t0:t1:nt");
        sub->add_option("--dt", o.dt, "oracle time step")->check(CLI::PositiveNumber);
        commands.emplace_back(sub, s.command);
    }
    CLI::App* demo_cmd = app.add_subcommand("demo", "run the bundled 1-soliton and 2-soliton configs");
    demo_cmd->add_option("--out", o.out, "output root (default ./demo)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (demo_cmd->parsed()) return run_demo(o.out);
        for (std::size_t k = 0; k < commands.size(); ++k) {
            auto [sub, command] = commands[k];
            if (!sub->parsed()) continue;
            const vnls::RunConfig cfg = load(o, check_opts[k]->count() > 0);
            const fs::path dir = cfg.output_dir;
            const auto m = vnls::run(cfg, command, dir);
            report(m, dir);
            return m.exit_code;
        }
    } catch (const vnls::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
