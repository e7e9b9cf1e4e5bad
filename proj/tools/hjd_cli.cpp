#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"

#include "experiments.hpp"
#include "hjd/hj/scan.hpp"
#include "hjd/io/pgm.hpp"
#include "hjd/io/results.hpp"

namespace fs = std::filesystem;
using namespace hjd;
using namespace hjd::cli;

namespace {

enum Exit { kOk = 0, kBadFlags = 2, kIo = 3, kNonConvergence = 4, kCheckFailed = 5 };

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InvalidInput(what + ": not a number '" + s + "'");
  return v;
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InvalidInput("--range must look like LO:HI");
  return {parse_number(s.substr(0, colon), "range"), parse_number(s.substr(colon + 1), "range")};
}

std::string setting(const RunManifest& m, const std::string& key, const std::string& fallback = "") {
  auto it = m.settings.find(key);
  return it == m.settings.end() ? fallback : it->second;
}

std::optional<double> param(const RunManifest& m, const std::string& key) {
  auto it = m.parameters.find(key);
  if (it == m.parameters.end()) return std::nullopt;
  return it->second;
}

double require_param(const RunManifest& m, const std::string& key) {
  const auto v = param(m, key);
  if (!v) throw InvalidInput(m.command + " needs --" + key);
  return *v;
}

const std::string& require_input(const RunManifest& m, std::size_t i, const std::string& flag) {
  if (m.inputs.size() <= i || m.inputs[i].empty()) throw InvalidInput(m.command + " needs " + flag);
  return m.inputs[i];
}

fs::path prepare_out(const RunManifest& m) {
  if (m.out.empty()) throw InvalidInput(m.command + " needs --out");
  std::error_code ec;
  fs::create_directories(m.out, ec);
  if (ec) throw IoError("cannot create " + m.out + ": " + ec.message(), 0);
  write_json(m.to_json(), (fs::path(m.out) / "manifest.json").string());
  return fs::path(m.out);
}

int report_invariants(const std::vector<Invariant>& inv, bool converged) {
  if (!converged) {
    std::cerr << "solver did not converge; outputs are flagged\n";
    return kNonConvergence;
  }
  if (const Invariant* f = first_failure(inv)) {
    std::cerr << "check failed: " << f->name << " (value " << format_double(f->value) << ", bound "
              << format_double(f->bound) << ")\n";
    return kCheckFailed;
  }
  return kOk;
}

// ---- decompose --------------------------------------------------------------

int cmd_decompose(const RunManifest& m) {
  ModelSpec spec;
  spec.kind = model_kind_from_string(m.model);
  spec.parameters = m.parameters;
  spec.validate();
  const ImageGrid x = read_image(require_input(m, 0, "--in"));
  const fs::path out = prepare_out(m);
  ModelOptions opt;
  opt.tol = m.tol;
  opt.variant = tv_variant_from_string(m.tv);
  const ModelRun run = run_model(spec, x, opt);

  Json comps = Json::object(), images = Json::object();
  for (const auto& [name, grid] : run.images) {
    comps[name] = vector_to_json(grid.values());
    images[name] = name + ".pgm";
    write_pgm(grid, (out / (name + ".pgm")).string());
  }
  Json r{{"model", m.model},
         {"parameters", m.parameters},
         {"tv", m.tv},
         {"tol", m.tol},
         {"rows", x.rows()},
         {"cols", x.cols()},
         {"value", run.value},
         {"gap", run.gap},
         {"iterations", run.iterations},
         {"converged", run.converged},
         {"uniqueness_warning", run.uniqueness_warning},
         {"components", comps},
         {"images", images}};
  r["p"] = run.momentum ? vector_to_json(*run.momentum) : Json(nullptr);
  write_json(r, (out / "result.json").string());
  return report_invariants({}, run.converged);
}

// ---- scan -------------------------------------------------------------------

int cmd_scan(const RunManifest& m) {
  const std::string axis = setting(m, "axis");
  const ImageGrid x = read_image(require_input(m, 0, "--in"));
  ScanSpec spec;
  std::tie(spec.lo, spec.hi) = parse_range(setting(m, "range", axis == "alpha" ? "0:1" : ""));
  spec.steps = static_cast<int>(parse_number(setting(m, "steps", "11"), "steps"));

  // the scanned parameter needs no flag of its own
  auto fixed = [&](const std::string& name) { return axis == name ? spec.lo : require_param(m, name); };
  TvSettings ts;
  ts.variant = tv_variant_from_string(m.tv);
  MultiTimeProblem prob;
  if (m.model == "a2bc") {
    prob = a2bc_problem(x.rows(), x.cols(), fixed("mu"), fixed("lambda"), ts.variant);
  } else if (m.model == "rof") {
    prob = MultiTimeProblem{tv_functional(x.rows(), x.cols(), 1.0, ts),
                            {{quadratic(1.0), quadratic(1.0), fixed("lambda")}}};
  } else {
    throw InvalidInput("scan supports --model a2bc or rof");
  }
  if (axis == "mu" || axis == "lambda") {
    spec.axis = ScanAxis::time;
    if (m.model == "rof" && axis == "mu") throw InvalidInput("rof has no mu axis");
    spec.time_index = (m.model == "a2bc" && axis == "lambda") ? 1 : 0;
  } else if (axis == "alpha") {
    spec.axis = ScanAxis::mixing;
    spec.x2 = m.inputs.size() > 1 && !m.inputs[1].empty() ? read_image(m.inputs[1]).values() : x.values();
    if (spec.x2.size() != x.size()) throw InvalidInput("scan: --in2 has a different size");
    spec.times2 = prob.times();
    if (m.model == "a2bc") {
      spec.times2[0] = param(m, "mu2").value_or(spec.times2[0]);
      spec.times2[1] = param(m, "lambda2").value_or(spec.times2[1]);
    } else {
      spec.times2[0] = param(m, "lambda2").value_or(spec.times2[0]);
    }
  } else {
    throw InvalidInput("--axis must be mu, lambda or alpha");
  }
  const fs::path out = prepare_out(m);
  LaxOptions lo;
  lo.tol = m.tol;
  const ScanResult res = scan_surface(prob, x.values(), spec, lo);

  CsvWriter csv({"param", "S", "p_norm", "gap"});
  Json rows = Json::array();
  bool converged = true;
  for (const auto& row : res.rows) {
    csv.row(std::vector<double>{row.param, row.value, row.p_norm, row.gap});
    rows.push_back({{"param", row.param}, {"S", row.value}, {"p_norm", row.p_norm}, {"gap", row.gap},
                    {"converged", row.converged}});
    converged = converged && row.converged;
  }
  csv.write((out / "scan.csv").string());
  const bool have_sd = res.rows.size() >= 3;
  const bool convex = !have_sd || res.min_second_difference >= -1e-6;
  Json diag{{"axis", axis},
            {"steps", spec.steps},
            {"min_second_difference", have_sd ? Json(res.min_second_difference) : Json(nullptr)},
            {"gap_allowance", res.gap_allowance},
            {"convex", convex},
            {"converged", converged}};
  write_json(diag, (out / "scan.json").string());
  Json full = diag;
  full["rows"] = rows;
  full["model"] = m.model;
  full["parameters"] = m.parameters;
  write_json(full, (out / "result.json").string());
  return report_invariants({}, converged);
}

// ---- limit ------------------------------------------------------------------

Json vectors_json(const std::vector<Vector>& vs) {
  Json a = Json::array();
  for (const auto& v : vs) a.push_back(vector_to_json(v));
  return a;
}

int cmd_limit(const RunManifest& m) {
  const LimitConfig cfg = limit_config_from_json(read_json(require_input(m, 0, "--config")));
  const fs::path out = prepare_out(m);
  const LimitReport rep = evaluate_limit(cfg);

  CsvWriter csv({"k", "t1", "S", "ratio", "p_norm", "gap"});
  Json rows = Json::array();
  for (const auto& row : rep.table.rows) {
    csv.row(std::vector<double>{double(row.k), row.t[0], row.value, row.ratio, row.p.norm(), row.gap});
    rows.push_back({{"k", row.k},
                    {"t", row.t},
                    {"S", row.value},
                    {"ratio", row.ratio},
                    {"p", vector_to_json(row.p)},
                    {"velocity", vectors_json(row.velocity)},
                    {"component_norm", row.component_norm},
                    {"gap", row.gap},
                    {"converged", row.converged}});
  }
  csv.write((out / "limit.csv").string());
  const SlopeEstimate& est = rep.table.ratio_estimate;
  Json r{{"rows", rows},
         {"ratio_estimate",
          {{"limit", est.limit}, {"order", est.order}, {"degenerate", est.degenerate}, {"low_confidence", est.low_confidence}}},
         {"invariants", invariants_json(rep.invariants)},
         {"passed", first_failure(rep.invariants) == nullptr},
         {"converged", rep.converged}};
  if (rep.dual) {
    r["dual_pair"] = {{"max", rep.dual->max_value},
                      {"q", vector_to_json(rep.dual->q)},
                      {"w", vectors_json(rep.dual->w)},
                      {"joint_residual", rep.dual->joint_residual},
                      {"separable_residual", rep.dual->separable_residual}};
  }
  if (!rep.table.complete) r["failure"] = rep.table.failure;
  write_json(r, (out / "result.json").string());
  return report_invariants(rep.invariants, rep.converged);
}

// ---- select -----------------------------------------------------------------

int cmd_select(const RunManifest& m) {
  const SelectConfig cfg = select_config_from_json(read_json(require_input(m, 0, "--config")));
  const fs::path out = prepare_out(m);
  const SelectReport rep = evaluate_select(cfg);

  CsvWriter csv({"c", "k", "lambda", "mu", "v_norm", "gap", "iterations"});
  Json paths = Json::array();
  for (std::size_t i = 0; i < rep.paths.size(); ++i) {
    const SelectionPath& path = rep.paths[i];
    Json steps = Json::array();
    for (std::size_t k = 0; k < path.steps.size(); ++k) {
      const SelectionStep& st = path.steps[k];
      csv.row(std::vector<double>{rep.c_values[i], double(k), st.lambda, st.mu, st.v.norm(), st.gap,
                                  double(st.iterations)});
      steps.push_back({{"lambda", st.lambda},
                       {"mu", st.mu},
                       {"value", st.value},
                       {"gap", st.gap},
                       {"iterations", st.iterations},
                       {"converged", st.converged},
                       {"floor_limited", st.floor_limited}});
    }
    paths.push_back({{"c", rep.c_values[i]},
                     {"steps", steps},
                     {"v_bar", vector_to_json(path.v_bar)},
                     {"p_bar", vector_to_json(path.p_bar)},
                     {"v_fallbacks", path.v_fallbacks},
                     {"p_fallbacks", path.p_fallbacks},
                     {"v_norm_monotone", path.v_norm_monotone},
                     {"converged", path.converged}});
  }
  csv.write((out / "select.csv").string());
  Json r{{"rows", cfg.x.rows()},
         {"cols", cfg.x.cols()},
         {"paths", paths},
         {"invariants", invariants_json(rep.invariants)},
         {"passed", first_failure(rep.invariants) == nullptr},
         {"converged", rep.converged}};
  write_json(r, (out / "result.json").string());
  return report_invariants(rep.invariants, rep.converged);
}

// ---- check ------------------------------------------------------------------

int cmd_check(const RunManifest& m) {
  const std::string suite = setting(m, "suite", "all");
  CheckOptions opt;
  opt.count = static_cast<int>(parse_number(setting(m, "count", "20"), "count"));
  opt.size = static_cast<Index>(parse_number(setting(m, "size", "6"), "size"));
  opt.seed = m.seed.value_or(7);
  opt.tol = m.tol;
  if (opt.count < 1 || opt.size < 1) throw InvalidInput("--count and --size must be positive");

  std::vector<Invariant> inv;
  auto run = [&](const std::string& name, auto fn) {
    if (suite == name || suite == "all") {
      const auto part = fn(opt);
      inv.insert(inv.end(), part.begin(), part.end());
    }
  };
  if (suite != "all" && suite != "duality" && suite != "hj" && suite != "limits" && suite != "selection")
    throw InvalidInput("--suite must be duality, hj, limits, selection or all");
  std::optional<fs::path> out;
  if (!m.out.empty()) out = prepare_out(m);
  run("duality", suite_duality);
  run("hj", suite_hj);
  run("limits", suite_limits);
  run("selection", suite_selection);

  std::size_t passed = 0;
  for (const auto& i : inv) passed += i.passed;
  std::cout << suite << ": " << passed << "/" << inv.size() << " invariants hold\n";
  if (out) {
    write_json(Json{{"suite", suite},
                    {"invariants", invariants_json(inv)},
                    {"passed", first_failure(inv) == nullptr}},
               (*out / "result.json").string());
  }
  return report_invariants(inv, true);
}

// ---- generate ---------------------------------------------------------------

ImageGrid generate_image(const std::string& kind, Index rows, Index cols, double value, double scale) {
  if (rows < 1 || cols < 1) throw InvalidInput("generate: sizes must be positive");
  Vector v = Vector::Zero(rows * cols);
  if (kind == "rectangle") {
    if (rows != cols) throw InvalidInput("generate: the rectangle image is square");
    const Index side = std::max<Index>(1, rows / 4);
    const ImageGrid x = tvl1_rectangle_case(rows, side, side, 1.0, 0.0).x;
    return x.with_values(scale * x.values());
  } else if (kind == "step") {
    for (Index i = 0; i < rows; ++i)
      for (Index j = cols / 2; j < cols; ++j) v[i * cols + j] = 1.0;
  } else if (kind == "strip") {
    // two-level cartoon with a band of vertical stripes across the middle
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) {
        double c = j >= cols / 2 ? 0.75 : 0.25;
        if (i >= rows / 3 && i < 2 * rows / 3) c += (j % 2 == 0 ? 0.15 : -0.15);
        v[i * cols + j] = c;
      }
  } else if (kind == "constant") {
    v.setConstant(value);
  } else {
    throw InvalidInput("generate: kind must be rectangle, step, strip or constant");
  }
  return ImageGrid(rows, cols, scale * v);
}

int cmd_generate(const std::string& kind, const std::string& path, Index rows, Index cols, double value,
                 double scale) {
  const ImageGrid g = generate_image(kind, rows, cols, value, scale);
  if (fs::path(path).extension() == ".json") {
    write_json(grid_to_json(g), path);
  } else {
    const double lo = g.values().minCoeff(), hi = g.values().maxCoeff();
    const bool bytes = lo >= 0.0 && hi <= 255.0 && (g.values().array() == g.values().array().round()).all();
    write_pgm(g, path, bytes ? std::optional<PgmRange>(PgmRange{}) : std::nullopt);
  }
  return kOk;
}

int execute(const RunManifest& m) {
  if (m.command == "decompose") return cmd_decompose(m);
  if (m.command == "scan") return cmd_scan(m);
  if (m.command == "limit") return cmd_limit(m);
  if (m.command == "select") return cmd_select(m);
  if (m.command == "check") return cmd_check(m);
  throw InvalidInput("manifest names unknown command '" + m.command + "'");
}

std::string absolute(const std::string& p) { return p.empty() ? p : fs::absolute(p).lexically_normal().string(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-time Hamilton-Jacobi image decomposition"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  RunManifest m;
  std::string in, in2, config, manifest_path, gen_kind, gen_out;
  std::optional<double> lambda, mu, alpha, beta, mu2, lambda2;
  std::string axis, range = "", suite = "all";
  int steps = 11, count = 20;
  Index size = 6, rows = 16, cols = 16;
  double gen_value = 0.5, gen_scale = 1.0;
  std::uint64_t seed = 7;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", m.out, "output directory");
    sub->add_option("--tol", m.tol, "duality gap tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--tv", m.tv, "total variation variant")->check(CLI::IsMember({"verbatim", "full"}));
  };
  auto params = [&](CLI::App* sub) {
    sub->add_option("--lambda", lambda)->check(CLI::PositiveNumber);
    sub->add_option("--mu", mu)->check(CLI::PositiveNumber);
    sub->add_option("--alpha", alpha)->check(CLI::PositiveNumber);
    sub->add_option("--beta", beta)->check(CLI::PositiveNumber);
  };

  auto* dec = app.add_subcommand("decompose", "decompose one image");
  dec->add_option("--model", m.model)->required()->check(CLI::IsMember({"rof", "a2bc", "meyer-g", "tvl1", "tvl1-reg"}));
  dec->add_option("--in", in, "input image (.pgm or .json)")->required();
  common(dec);
  params(dec);
  dec->get_option("--out")->required();

  auto* scan = app.add_subcommand("scan", "minimal value along one parameter axis");
  m.model = "a2bc";
  scan->add_option("--model", m.model)->check(CLI::IsMember({"rof", "a2bc"}));
  scan->add_option("--in", in)->required();
  scan->add_option("--axis", axis)->required()->check(CLI::IsMember({"mu", "lambda", "alpha"}));
  scan->add_option("--range", range, "LO:HI");
  scan->add_option("--steps", steps)->check(CLI::PositiveNumber);
  scan->add_option("--in2", in2, "second endpoint image for the alpha axis");
  scan->add_option("--mu2", mu2)->check(CLI::PositiveNumber);
  scan->add_option("--lambda2", lambda2)->check(CLI::PositiveNumber);
  common(scan);
  params(scan);
  scan->get_option("--out")->required();

  auto* lim = app.add_subcommand("limit", "vanishing-time limit table");
  lim->add_option("--config", config)->required();
  common(lim);
  lim->get_option("--out")->required();

  auto* sel = app.add_subcommand("select", "min-norm selection path");
  sel->add_option("--config", config)->required();
  common(sel);
  sel->get_option("--out")->required();

  auto* chk = app.add_subcommand("check", "invariant suites");
  chk->add_option("--suite", suite)->check(CLI::IsMember({"duality", "hj", "limits", "selection", "all"}));
  chk->add_option("--count", count)->check(CLI::PositiveNumber);
  chk->add_option("--size", size)->check(CLI::PositiveNumber);
  chk->add_option("--seed", seed);
  common(chk);

  auto* gen = app.add_subcommand("generate", "write a synthetic image");
  gen->add_option("kind", gen_kind)->required()->check(CLI::IsMember({"rectangle", "step", "strip", "constant"}));
  gen->add_option("--out", gen_out, "output file (.pgm or .json)")->required();
  gen->add_option("--rows", rows)->check(CLI::PositiveNumber);
  gen->add_option("--cols", cols)->check(CLI::PositiveNumber);
  gen->add_option("--value", gen_value, "level of the constant image");
  gen->add_option("--scale", gen_scale, "multiplier applied to all values");

  auto* rerun = app.add_subcommand("rerun", "repeat a run from its manifest");
  rerun->add_option("--manifest", manifest_path)->required();
  std::string rerun_out;
  rerun->add_option("--out", rerun_out, "output directory (default: the recorded one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadFlags;
  }

  try {
    if (*gen) return cmd_generate(gen_kind, gen_out, rows, cols, gen_value, gen_scale);
    if (*rerun) {
      RunManifest r = RunManifest::from_json(read_json(manifest_path));
      if (!rerun_out.empty()) r.out = absolute(rerun_out);
      return execute(r);
    }
    auto put = [&](const char* name, const std::optional<double>& v) {
      if (v) m.parameters[name] = *v;
    };
    put("lambda", lambda);
    put("mu", mu);
    put("alpha", alpha);
    put("beta", beta);
    put("mu2", mu2);
    put("lambda2", lambda2);
    m.out = absolute(m.out);
    if (*dec) {
      m.command = "decompose";
      m.inputs = {absolute(in)};
    } else if (*scan) {
      m.command = "scan";
      m.inputs = {absolute(in), absolute(in2)};
      m.settings = {{"axis", axis}, {"steps", std::to_string(steps)}};
      if (!range.empty()) m.settings["range"] = range;
    } else if (*lim || *sel) {
      m.command = *lim ? "limit" : "select";
      m.model.clear();
      m.inputs = {absolute(config)};
    } else if (*chk) {
      m.command = "check";
      m.model.clear();
      m.seed = seed;
      m.settings = {{"suite", suite}, {"count", std::to_string(count)}, {"size", std::to_string(size)}};
    }
    return execute(m);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << " (byte " << e.offset() << ")\n";
    return kIo;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kBadFlags;
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kBadFlags;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kBadFlags;
  } catch (const Error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kNonConvergence;
  }
}
