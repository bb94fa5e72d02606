#include <cstdint>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bhk/experiments.hpp"
#include "bhk/field_io.hpp"
#include "bhk/littlewood_paley.hpp"
#include "bhk/presets.hpp"

namespace {

double parse_exponent(const std::string& s, const std::string& what) { return bhk::parse_number(s, what); }

bhk::Grid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
  if (parts.size() != 3) throw bhk::ConfigError("--grid: expected n,N,L, got '" + text + "'");
  try {
    return bhk::make_grid(std::stoi(parts[0]), std::stoi(parts[1]), std::stod(parts[2]));
  } catch (const std::invalid_argument&) {
    throw bhk::ConfigError("--grid: expected n,N,L, got '" + text + "'");
  }
}

int run_norm(const std::string& file, const std::string& space, const std::string& alpha, const std::string& p,
             const std::string& q, const std::string& s, const std::string& r) {
  const bhk::Field f = bhk::as_physical(bhk::read_field(file));
  const bhk::HerzParams hp{parse_exponent(alpha, "--alpha"), parse_exponent(p, "--p"), parse_exponent(q, "--q")};
  if (space == "wk") {
    std::cout << bhk::profile_json(bhk::weak_herz_norm(f, hp), "wk") << "\n";
  } else if (space == "swk") {
    const bhk::BesovParams bp{hp.alpha, hp.p, hp.q, parse_exponent(s, "--s"), bhk::inf};
    nlohmann::ordered_json j = {{"space", "swk"},
                                {"alpha", bp.alpha},
                                {"p", bhk::exponent_text(bp.p)},
                                {"q", bhk::exponent_text(bp.q)},
                                {"s", bp.s},
                                {"value", bhk::sobolev_wh_norm(f, bp)}};
    std::cout << j.dump(2) << "\n";
  } else if (space == "bwk") {
    const bhk::BesovParams bp{hp.alpha, hp.p, hp.q, parse_exponent(s, "--s"), parse_exponent(r, "--r")};
    std::cout << bhk::block_profile_json(bhk::besov_wh_norm(f, bp), "bwk") << "\n";
  } else {
    throw bhk::ConfigError("--space: expected wk, swk or bwk, got '" + space + "'");
  }
  return 0;
}

int run_gen(const std::string& preset, const std::string& grid, const std::string& out,
            const std::vector<std::string>& params) {
  bhk::PresetParams pp;
  for (const auto& kv : params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw bhk::ConfigError("--param: expected key=value, got '" + kv + "'");
    pp[kv.substr(0, eq)] = bhk::parse_number(kv.substr(eq + 1), "--param " + kv.substr(0, eq));
  }
  const bhk::Field f = bhk::preset_field(preset, pp, parse_grid(grid));
  nlohmann::ordered_json side = {{"preset", preset}};
  for (const auto& [k, v] : pp) side["params"][k] = v;
  bhk::write_field(f, out, side.dump(2));
  std::cout << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak-Herz norms, dyadic estimates and mild Navier-Stokes solutions"};
  app.require_subcommand(1);

  std::string field, space = "wk", alpha = "0", p = "2", q = "inf", s = "0", r = "inf";
  auto* norm = app.add_subcommand("norm", "evaluate a norm of a stored field");
  norm->add_option("--field", field, "BHF1 file")->required();
  norm->add_option("--space", space, "wk | swk | bwk");
  norm->add_option("--alpha", alpha);
  norm->add_option("--p", p);
  norm->add_option("--q", q);
  norm->add_option("--s", s);
  norm->add_option("--r", r);

  std::string preset, grid, out_file;
  std::vector<std::string> params;
  auto* gen = app.add_subcommand("gen", "write a preset field");
  gen->add_option("--preset", preset)->required();
  gen->add_option("--grid", grid, "n,N,L")->required();
  gen->add_option("--out", out_file)->required();
  gen->add_option("--param", params, "key=value");

  std::string config, out_dir;
  std::uint64_t seed = 0;
  bool calibrate = false;
  std::vector<CLI::App*> exps;
  for (const auto& name : bhk::experiment_names()) {
    auto* e = app.add_subcommand(name, "run the " + name + " experiment");
    e->add_option("--config", config)->required();
    e->add_flag("--calibrate", calibrate, "measure and freeze ceilings");
    e->add_option("--out", out_dir);
    e->add_option("--seed", seed);
    exps.push_back(e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*norm) return run_norm(field, space, alpha, p, q, s, r);
    if (*gen) return run_gen(preset, grid, out_file, params);
    for (auto* e : exps) {
      if (!*e) continue;
      bhk::ExperimentConfig cfg = bhk::ExperimentConfig::load(config);
      if (cfg.name() != e->get_name())
        throw bhk::ConfigError("experiment.name: config names '" + cfg.name() + "' but '" + e->get_name() +
                               "' was requested");
      bhk::RunOptions opts;
      opts.calibrate = calibrate;
      if (!out_dir.empty()) opts.out = out_dir;
      if (e->count("--seed")) opts.seed = seed;
      const auto res = bhk::run_experiment(cfg, opts);
      for (const auto& a : res.report.assertions())
        std::cout << (a.pass ? "ok   " : "FAIL ") << a.name << " " << bhk::format_double(a.measured) << " "
                  << a.relation << " " << bhk::format_double(a.bound) << "\n";
      std::cout << (res.exit_code == 0 ? "PASS " : "FAIL ") << res.report.experiment() << " -> "
                << res.out_dir.string() << "\n";
      return res.exit_code;
    }
  } catch (const bhk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const bhk::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
