// cstarmod: deterministic instance generators, pipeline runners, suite and
// certificate I/O for the finite-dimensional Hilbert C*-module toolkit.

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cstarmod/checks.hpp"
#include "cstarmod/json_io.hpp"

namespace cstarmod {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerdictFailure = 1;
constexpr int kExitSchemaError = 2;
constexpr int kExitNumericalBreakdown = 3;

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

Json load_json(const std::string& path) {
  Json doc;
  try {
    if (path == "-") {
      doc = Json::parse(std::cin);
    } else {
      std::ifstream in(path);
      if (!in) throw SchemaError("cannot open input file: " + path);
      doc = Json::parse(in);
    }
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("JSON parse error: ") + e.what());
  }
  if (doc.contains("schema") && doc.at("schema") != kSchemaName)
    throw SchemaError("unsupported schema version");
  return doc;
}

void write_output(const Json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream os(out);
  if (!os) throw SchemaError("cannot open output file: " + out);
  os << doc.dump(2) << "\n";
}

struct ResultRow {
  std::string instance;
  bool pass = true;
  std::string note;
  Json residuals = Json::object();
  Json certificate;  // null unless produced
  Json offending;    // null unless failed
  double wall_ms = 0.0;
};

Json report_json(const std::string& command, const RunConfig& cfg,
                 std::vector<ResultRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const ResultRow& a, const ResultRow& b) { return a.instance < b.instance; });
  Json results = Json::array();
  Index pass = 0, fail = 0;
  for (const ResultRow& r : rows) {
    (r.pass ? pass : fail) += 1;
    Json row{{"instance", r.instance},
             {"verdict", r.pass ? "pass" : "fail"},
             {"residuals", r.residuals},
             {"wall_ms", r.wall_ms}};
    if (!r.note.empty()) row["note"] = r.note;
    if (!r.certificate.is_null()) row["certificate"] = r.certificate;
    if (!r.offending.is_null()) row["offending_instance"] = r.offending;
    results.push_back(std::move(row));
  }
  return Json{{"schema", kSchemaName},
              {"command", command},
              {"config", to_json(cfg)},
              {"results", std::move(results)},
              {"summary", {{"pass", pass}, {"fail", fail}}}};
}

// ---- gen ------------------------------------------------------------------

Json gen_instance(const std::string& kind, const RunConfig& cfg) {
  Rng rng = Rng(cfg.seed).split(checks::stream_of(kind.c_str()));
  Json doc{{"schema", kSchemaName}, {"kind", kind}, {"seed", cfg.seed}};
  if (kind == "cp-map") {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    OperatorMap phi = random_cp_map(rng, a, rng.uniform_index(1, cfg.caps.max_dim_h));
    doc.update(to_json(phi));
  } else if (kind == "linear-map") {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    HilbertModule mod{a, rng.uniform_index(1, cfg.caps.max_m)};
    ModuleMap f = random_module_map(rng, mod, rng.uniform_index(1, cfg.caps.max_dim_h),
                                    rng.uniform_index(1, cfg.caps.max_dim_h));
    doc.update(to_json(f));
  } else if (kind == "module-map") {
    PhiMapInstance inst = random_phi_map_instance(rng, cfg.caps, cfg.tol);
    doc["module"] = to_json(inst.module);
    doc["dim_H"] = inst.phi.dim_H;
    doc["phi"] = to_json(inst.phi);
    doc["Phi"] = to_json(inst.Phi);
  } else if (kind == "kernel") {
    FiniteKernel k = random_kernel(rng, rng.uniform_index(2, 5),
                                   rng.uniform_index(1, cfg.caps.max_dim_h));
    doc.update(to_json(k));
  } else if (kind == "representation") {
    BlockAlgebra a = random_algebra(rng, cfg.caps);
    OperatorMap pi = random_representation(rng, a);
    doc.update(to_json(pi));
  } else {
    throw SchemaError("unknown instance kind: " + kind);
  }
  return doc;
}

// ---- input adapters ---------------------------------------------------------

OperatorMap load_operator_map(const Json& doc) {
  OperatorMap f = operator_map_from_json(doc);
  try {
    f.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return f;
}

ModuleMap load_linear_module_map(const Json& doc) {
  const Json& src = doc.contains("Phi") ? doc.at("Phi") : doc;
  ModuleMap f = module_map_from_json(src);
  try {
    f.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return f;
}

// ---- run handlers -----------------------------------------------------------

ResultRow run_stinespring(const Json& input, const RunConfig& cfg) {
  ResultRow row{"stinespring/0"};
  OperatorMap phi = load_operator_map(input);
  if (!phi.square() || !is_completely_positive(phi, cfg.tol)) {
    row.pass = false;
    row.note = "not completely positive";
    row.offending = input;
    return row;
  }
  StinespringTriple st = minimal_stinespring(phi, cfg.tol);
  StinespringReport rep = verify_stinespring(phi, st, cfg.tol);
  row.pass = rep.ok;
  row.residuals = Json{{"contract", rep.contract_residual},
                       {"multiplicativity", rep.mult_residual},
                       {"star", rep.star_residual},
                       {"unit", rep.unit_residual},
                       {"minimality_rank", rep.minimality_rank},
                       {"dim_K", st.dim_K}};
  row.certificate = to_json(st, rep);
  if (!row.pass) row.offending = input;
  return row;
}

ResultRow run_kolmogorov(const Json& input, const RunConfig& cfg) {
  ResultRow row{"kolmogorov/0"};
  FiniteKernel k = kernel_from_json(input);
  try {
    k.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  if (!is_positive_definite(k, cfg.tol)) {
    row.pass = false;
    row.note = "not positive definite";
    row.offending = input;
    return row;
  }
  KolmogorovPair p = minimal_kolmogorov(k, cfg.tol);
  double residual = kolmogorov_residual(k, p);
  row.pass = residual <= cfg.tol.eps_eq * std::max(1.0, op_norm(k.full_gram())) &&
             check_minimal(p, cfg.tol);
  row.residuals = Json{{"reconstruction", residual}, {"dim_K", p.dim_K}};
  row.certificate = to_json(p, residual);
  if (!row.pass) row.offending = input;
  return row;
}

ResultRow run_canonical_phi(const Json& input, const RunConfig& cfg) {
  ResultRow row{"canonical-phi/0"};
  OperatorMap phi = load_operator_map(input.contains("phi") ? input.at("phi") : input);
  HilbertModule mod = input.contains("module") ? module_from_json(input.at("module"))
                                               : HilbertModule{phi.domain, 1};
  if (!(mod.algebra == phi.domain)) throw SchemaError("module algebra does not match phi domain");
  if (!is_completely_positive(phi, cfg.tol)) {
    row.pass = false;
    row.note = "not completely positive";
    row.offending = input;
    return row;
  }
  CanonicalPhiData cphi = construct_canonical_phi(phi, mod, cfg.tol);
  double residual = phi_map_residual(cphi.phi_map, phi);
  bool nondeg = is_nondegenerate(cphi.phi_map, cfg.tol);
  row.pass = residual <= cfg.tol.eps_eq * std::max(1.0, op_norm(phi_gram(phi, mod))) && nondeg;
  row.residuals = Json{{"phi_map_identity", residual},
                       {"nondegenerate", nondeg},
                       {"dim_Hphi", cphi.dim_Hphi}};
  row.certificate = to_json(cphi, residual, nondeg);
  if (!row.pass) row.offending = input;
  return row;
}

ResultRow run_factor_phi(const Json& input, const RunConfig& cfg) {
  ResultRow row{"factor-phi/0"};
  if (!input.contains("phi") || !input.contains("Phi"))
    throw SchemaError("factor-phi expects a module-map bundle with 'phi' and 'Phi'");
  OperatorMap phi = load_operator_map(input.at("phi"));
  ModuleMap f = load_linear_module_map(input);
  if (!(f.module.algebra == phi.domain))
    throw SchemaError("module algebra does not match phi domain");
  if (!is_completely_positive(phi, cfg.tol)) {
    row.pass = false;
    row.note = "not completely positive";
    row.offending = input;
    return row;
  }
  if (!is_phi_map(f, phi, cfg.tol)) {
    row.pass = false;
    row.note = "input is not a phi-map for the given phi";
    row.offending = input;
    return row;
  }
  CanonicalPhiData cphi = construct_canonical_phi(phi, f.module, cfg.tol);
  StinespringTriple st = minimal_stinespring(phi, cfg.tol);
  CanonicalRepData crep = construct_canonical_rep(st.pi, f.module, cfg.tol);
  PhiFactorization fac = factor_phi_map(f, phi, cphi, crep, st.V, cfg.tol);
  const double scale = 1.0 + op_norm(stacked_images(f));
  row.pass = fac.intertwine_residual <= cfg.tol.eps_eq * scale &&
             fac.dilation_residual <= cfg.tol.eps_eq * scale &&
             (fac.s_class == IsometryClass::isometry || fac.s_class == IsometryClass::unitary);
  row.residuals = Json{{"intertwine", fac.intertwine_residual},
                       {"dilation", fac.dilation_residual},
                       {"S_class", to_string(fac.s_class)},
                       {"W_class", to_string(fac.w_class)}};
  row.certificate = to_json(fac);
  if (!row.pass) row.offending = input;
  return row;
}

ResultRow run_dilate(const Json& input, const RunConfig& cfg) {
  ResultRow row{"dilate/0"};
  ModuleMap f = load_linear_module_map(input);
  DilationCertificate cert = dilate(f, cfg.tol);
  double scale = 1.0;
  for (const CMatrix& im : f.images) scale = std::max(scale, op_norm(im));
  row.pass = cert.residual <= cfg.tol.eps_eq * scale && op_norm(cert.W) <= 1 + cfg.tol.eps_eq;
  row.residuals = Json{{"dilation", cert.residual},
                       {"W_norm", op_norm(cert.W)},
                       {"dim_Kpi", cert.rep.dim_Kpi}};
  row.certificate = to_json(cert);
  if (!row.pass) row.offending = input;
  return row;
}

ResultRow run_factor_cb(const Json& input, const RunConfig& cfg) {
  ResultRow row{"factor-cb/0"};
  ModuleMap f = load_linear_module_map(input);
  FactorizationCertificate cert = factor_cb(f, cfg.tol);
  Rng rng = Rng(cfg.seed).split(checks::stream_of("factor-cb/verify"));
  FactorizationReport rep = verify_factorization(f, cert, cfg.tol);
  CbBoundReport bound = verify_cb_bound(cert, f, cfg.levels, rng, cfg.tol);
  row.pass = rep.ok && bound.ok;
  row.residuals = Json{{"factorization", rep.residual},
                       {"gamma_phi_map", rep.gamma_residual},
                       {"cb_upper", cert.cb_upper},
                       {"cb_lower_bound", bound.lower_bound},
                       {"worst_excess", bound.worst_excess}};
  row.certificate = to_json(cert);
  if (!row.pass) row.offending = input;
  return row;
}

ResultRow run_cp_extend(const Json& input, const RunConfig& cfg) {
  ResultRow row{"cp-extend/0"};
  ModuleMap f = load_linear_module_map(input);
  DilationCertificate dil = dilate(f, cfg.tol);
  CPExtensionCertificate cert = cp_extend(f, dil, cfg.tol);
  CPExtensionReport rep = verify_cp_extension(f, cert, cfg.tol);
  row.pass = rep.ok;
  row.residuals = Json{{"choi_min_eig", rep.choi_min_eig},
                       {"corner", rep.corner_residual},
                       {"phi1_cp", rep.phi1_cp},
                       {"phi2_cp", rep.phi2_cp}};
  row.certificate = to_json(cert);
  if (!row.pass) row.offending = input;
  return row;
}

ResultRow run_corollary25(const Json& input, const RunConfig& cfg) {
  ResultRow row{"corollary25/0"};
  OperatorMap psi;
  if (input.contains("domain")) {
    psi = load_operator_map(input);
  } else {
    ModuleMap f = load_linear_module_map(input);
    if (f.module.m != 1 || f.dim_out != f.dim_H)
      throw SchemaError("corollary25 expects a square map on A (m == 1, dim_out == dim_H)");
    psi = OperatorMap{f.module.algebra, f.dim_H, f.dim_out, f.images};
  }
  if (!psi.square()) throw SchemaError("corollary25 expects a square-valued map");
  CPExtensionCertificate cert = corollary_2_5(psi, cfg.tol);
  CPExtensionReport rep = verify_cp_extension(module_map_from_operator_map(psi), cert, cfg.tol);
  row.pass = rep.ok;
  row.residuals = Json{{"choi_min_eig", rep.choi_min_eig}, {"corner", rep.corner_residual}};
  row.certificate = to_json(cert);
  if (!row.pass) row.offending = input;
  return row;
}

std::vector<ResultRow> run_suite(const RunConfig& cfg) {
  std::vector<ResultRow> rows;
  for (const CheckSpec& spec : all_checks()) {
    auto t0 = std::chrono::steady_clock::now();
    CheckResult res = spec.fn(cfg);
    ResultRow row{res.id};
    row.pass = res.pass;
    row.note = res.note;
    row.residuals = Json{{"worst", res.worst}};
    row.offending = res.offending;
    row.wall_ms = ms_since(t0);
    rows.push_back(std::move(row));
  }
  return rows;
}

int dispatch(const std::string& mode, const std::string& arg, const std::string& input_path,
             const RunConfig& cfg, const std::string& out) {
  if (mode == "gen") {
    write_output(gen_instance(arg, cfg), out);
    return kExitOk;
  }
  std::vector<ResultRow> rows;
  if (arg == "suite") {
    rows = run_suite(cfg);
  } else {
    if (input_path.empty())
      throw SchemaError("run " + arg + " requires an input file (or '-' for stdin)");
    auto t0 = std::chrono::steady_clock::now();
    Json input = load_json(input_path);
    ResultRow row;
    if (arg == "stinespring") row = run_stinespring(input, cfg);
    else if (arg == "kolmogorov") row = run_kolmogorov(input, cfg);
    else if (arg == "canonical-phi") row = run_canonical_phi(input, cfg);
    else if (arg == "factor-phi") row = run_factor_phi(input, cfg);
    else if (arg == "factor-cb") row = run_factor_cb(input, cfg);
    else if (arg == "dilate") row = run_dilate(input, cfg);
    else if (arg == "cp-extend") row = run_cp_extend(input, cfg);
    else if (arg == "corollary25") row = run_corollary25(input, cfg);
    else throw SchemaError("unknown run command: " + arg);
    row.wall_ms = ms_since(t0);
    rows.push_back(std::move(row));
  }
  Json report = report_json("run " + arg, cfg, rows);
  write_output(report, out);
  const auto& summary = report.at("summary");
  return summary.at("fail").get<Index>() == 0 ? kExitOk : kExitVerdictFailure;
}

}  // namespace
}  // namespace cstarmod

int main(int argc, char** argv) {
  using namespace cstarmod;
  CLI::App app{"finite-dimensional Hilbert C*-module toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string out;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "PRNG seed (default 0)");
    sub->add_option("--tol-psd", cfg.tol.eps_psd, "relative PSD eigenvalue floor");
    sub->add_option("--tol-rank", cfg.tol.eps_rank, "relative rank cutoff");
    sub->add_option("--tol-eq", cfg.tol.eps_eq, "relative equality residual bound");
    sub->add_option("--levels", cfg.levels, "max amplification level (default 3)");
    sub->add_option("--trials", cfg.trials, "sample count for suite/bound checks (default 50)");
    sub->add_option("--out", out, "write the JSON document to this file");
    sub->add_option("--max-block", cfg.caps.max_block, "max matrix block size");
    sub->add_option("--max-m", cfg.caps.max_m, "max module rank");
    sub->add_option("--max-dimh", cfg.caps.max_dim_h, "max Hilbert space dimension");
  };

  std::string gen_kind, run_command_name, input_path;
  CLI::App* gen = app.add_subcommand("gen", "generate a deterministic instance");
  gen->add_option("kind", gen_kind, "cp-map | linear-map | module-map | kernel | representation")
      ->required();
  add_common(gen);

  CLI::App* run = app.add_subcommand("run", "run a pipeline or the property suite");
  run->add_option("command", run_command_name,
                  "stinespring | kolmogorov | canonical-phi | factor-phi | factor-cb | dilate | "
                  "cp-extend | corollary25 | suite")
      ->required();
  run->add_option("input", input_path, "instance JSON file ('-' for stdin)");
  add_common(run);

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.tol.validate();
    if (gen->parsed()) return dispatch("gen", gen_kind, "", cfg, out);
    return dispatch("run", run_command_name, input_path, cfg, out);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchemaError;
  } catch (const NumericalBreakdown& e) {
    std::cerr << "numerical breakdown: " << e.what() << "\n";
    return kExitNumericalBreakdown;
  } catch (const std::invalid_argument& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchemaError;
  }
}
