#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "viscoflow/app.hpp"

int main(int argc, char** argv) {
  using namespace viscoflow;
  CLI::App app{"Viscoelastic flow solver with conformation-tensor positivity and energy diagnostics"};
  app.set_version_flag("--version", std::string(version_string));
  std::string mode, config_path, out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("mode", mode, "run | verify_mms | sweep_eps | sweep_gamma | check_identities")
      ->required()
      ->check(CLI::IsMember(mode_names()));
  app.add_option("--config", config_path, "configuration file")->required();
  auto* out_opt = app.add_option("--out", out_dir, "output directory (default: [output] dir)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed override");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads override")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  SimConfig cfg;
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      std::cerr << "cannot read config file " << config_path << "\n";
      return exit_config;
    }
    std::stringstream text;
    text << in.rdbuf();
    cfg = parse_config(text.str());
    cfg.mode = mode;
    if (*seed_opt) cfg.seed = seed;
    if (*threads_opt) cfg.threads = static_cast<int>(threads);
    if (*out_opt) cfg.output.dir = out_dir;
    validate_config(cfg);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_config;
  }

  try {
    return run_mode(cfg, cfg.output.dir);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}
