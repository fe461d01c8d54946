#pragma once

#include <json.hpp>
#include <string>

#include "cstarmod/cb_factor.hpp"
#include "cstarmod/errors.hpp"
#include "cstarmod/generators.hpp"

namespace cstarmod {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaName = "cstar-mod/1";

// ---- serialization -------------------------------------------------------
// Complex scalars as [re, im], matrices as row-major nested arrays.

inline Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const Tolerance& t) {
  return Json{{"eps_psd", t.eps_psd}, {"eps_rank", t.eps_rank}, {"eps_eq", t.eps_eq}};
}

inline Json to_json(const BlockAlgebra& a) { return Json{{"blocks", a.block_sizes}}; }

inline Json to_json(const HilbertModule& mod) {
  return Json{{"algebra", to_json(mod.algebra)}, {"m", mod.m}};
}

inline Json images_to_json(const std::vector<CMatrix>& images) {
  Json arr = Json::array();
  for (const CMatrix& im : images) arr.push_back(to_json(im));
  return arr;
}

inline Json to_json(const OperatorMap& f) {
  return Json{{"domain", to_json(f.domain)},
              {"dim_H", f.dim_H},
              {"dim_K", f.dim_K},
              {"images", images_to_json(f.images)}};
}

inline Json to_json(const ModuleMap& f) {
  return Json{{"module", to_json(f.module)},
              {"dim_H", f.dim_H},
              {"dim_out", f.dim_out},
              {"images", images_to_json(f.images)}};
}

inline Json to_json(const FiniteKernel& k) {
  Json gram = Json::array();
  for (const auto& row : k.gram) {
    Json r = Json::array();
    for (const CMatrix& blk : row) r.push_back(to_json(blk));
    gram.push_back(std::move(r));
  }
  return Json{{"points", k.points}, {"dim_H", k.dim_H}, {"gram", std::move(gram)}};
}

// ---- parsing ---------------------------------------------------------------

inline const Json& require_field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name))
    throw SchemaError(std::string("missing field '") + name + "'");
  return j.at(name);
}

inline Index index_from_json(const Json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw SchemaError(std::string(what) + ": expected a non-negative integer");
  return static_cast<Index>(j.get<long long>());
}

inline Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw SchemaError("complex scalar: expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

// rows/cols of -1 accept whatever shape the document carries; a bare [] is a
// 0 x 0 matrix unless expected dimensions say otherwise.
inline CMatrix matrix_from_json(const Json& j, Index rows = -1, Index cols = -1) {
  if (!j.is_array()) throw SchemaError("matrix: expected an array of rows");
  const Index r = static_cast<Index>(j.size());
  if (rows >= 0 && r != rows) throw SchemaError("matrix: row count mismatch");
  Index c = -1;
  if (r > 0) {
    if (!j[0].is_array()) throw SchemaError("matrix: expected an array of rows");
    c = static_cast<Index>(j[0].size());
  }
  if (c < 0) c = cols >= 0 ? cols : 0;  // empty document: trust the expected shape
  if (cols >= 0 && c != cols) throw SchemaError("matrix: column count mismatch");
  CMatrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    const Json& row = j[i];
    if (!row.is_array() || static_cast<Index>(row.size()) != c)
      throw SchemaError("matrix: ragged rows");
    for (Index k = 0; k < c; ++k) m(i, k) = complex_from_json(row[k]);
  }
  if (m.size() > 0 && !m.allFinite()) throw SchemaError("matrix: entries must be finite");
  return m;
}

inline Tolerance tolerance_from_json(const Json& j) {
  Tolerance t;
  if (j.contains("eps_psd")) t.eps_psd = j.at("eps_psd").get<double>();
  if (j.contains("eps_rank")) t.eps_rank = j.at("eps_rank").get<double>();
  if (j.contains("eps_eq")) t.eps_eq = j.at("eps_eq").get<double>();
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return t;
}

inline BlockAlgebra algebra_from_json(const Json& j) {
  BlockAlgebra a;
  const Json& blocks = require_field(j, "blocks");
  if (!blocks.is_array()) throw SchemaError("algebra: 'blocks' must be an array");
  for (const Json& b : blocks) a.block_sizes.push_back(index_from_json(b, "block size"));
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return a;
}

inline HilbertModule module_from_json(const Json& j) {
  HilbertModule mod{algebra_from_json(require_field(j, "algebra")),
                    index_from_json(require_field(j, "m"), "module rank")};
  try {
    mod.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return mod;
}

inline std::vector<CMatrix> images_from_json(const Json& j, Index count, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != count)
    throw SchemaError("images: wrong number of basis images");
  std::vector<CMatrix> images;
  images.reserve(count);
  for (const Json& im : j) images.push_back(matrix_from_json(im, rows, cols));
  return images;
}

inline OperatorMap operator_map_from_json(const Json& j) {
  OperatorMap f;
  f.domain = algebra_from_json(require_field(j, "domain"));
  f.dim_H = index_from_json(require_field(j, "dim_H"), "dim_H");
  f.dim_K = j.contains("dim_K") ? index_from_json(j.at("dim_K"), "dim_K") : f.dim_H;
  f.images = images_from_json(require_field(j, "images"), f.domain.linear_dim(), f.dim_K, f.dim_H);
  return f;
}

inline ModuleMap module_map_from_json(const Json& j) {
  ModuleMap f;
  f.module = module_from_json(require_field(j, "module"));
  f.dim_H = index_from_json(require_field(j, "dim_H"), "dim_H");
  f.dim_out = index_from_json(require_field(j, "dim_out"), "dim_out");
  f.images = images_from_json(require_field(j, "images"), f.module.dim_E(), f.dim_out, f.dim_H);
  return f;
}

inline FiniteKernel kernel_from_json(const Json& j) {
  FiniteKernel k;
  const Json& points = require_field(j, "points");
  if (!points.is_array()) throw SchemaError("kernel: 'points' must be an array");
  for (const Json& p : points) k.points.push_back(p.get<std::string>());
  k.dim_H = index_from_json(require_field(j, "dim_H"), "dim_H");
  const Json& gram = require_field(j, "gram");
  if (!gram.is_array() || gram.size() != points.size())
    throw SchemaError("kernel: gram must be an NxN array of blocks");
  for (const Json& row : gram) {
    if (!row.is_array() || row.size() != points.size())
      throw SchemaError("kernel: gram must be an NxN array of blocks");
    std::vector<CMatrix> blocks;
    for (const Json& blk : row) blocks.push_back(matrix_from_json(blk, k.dim_H, k.dim_H));
    k.gram.push_back(std::move(blocks));
  }
  return k;
}

// ---- certificates ----------------------------------------------------------

inline Json to_json(const StinespringTriple& st, const StinespringReport& rep) {
  return Json{{"schema", kSchemaName},
              {"kind", "stinespring-certificate"},
              {"dim_K", st.dim_K},
              {"pi_images", images_to_json(st.pi.images)},
              {"V", to_json(st.V)},
              {"residuals",
               {{"contract", rep.contract_residual},
                {"multiplicativity", rep.mult_residual},
                {"star", rep.star_residual},
                {"unit", rep.unit_residual},
                {"minimality_rank", rep.minimality_rank}}}};
}

inline Json to_json(const KolmogorovPair& p, double residual) {
  return Json{{"schema", kSchemaName},
              {"kind", "kolmogorov-certificate"},
              {"dim_K", p.dim_K},
              {"nu", images_to_json(p.nu)},
              {"minimal", p.minimal},
              {"residuals", {{"reconstruction", residual}}}};
}

inline Json to_json(const CanonicalPhiData& c, double residual, bool nondegenerate) {
  return Json{{"schema", kSchemaName},
              {"kind", "canonical-phi-certificate"},
              {"dim_Hphi", c.dim_Hphi},
              {"phi_map", to_json(c.phi_map)},
              {"residuals", {{"phi_map_identity", residual}, {"nondegenerate", nondegenerate}}}};
}

inline Json to_json(const PhiFactorization& f) {
  return Json{{"schema", kSchemaName},
              {"kind", "phi-factorization-certificate"},
              {"S", to_json(f.S)},
              {"W", to_json(f.W)},
              {"S_class", to_string(f.s_class)},
              {"W_class", to_string(f.w_class)},
              {"residuals",
               {{"intertwine", f.intertwine_residual}, {"dilation", f.dilation_residual}}}};
}

inline Json to_json(const DilationCertificate& d) {
  return Json{{"schema", kSchemaName},
              {"kind", "dilation-certificate"},
              {"psi", to_json(d.psi)},
              {"pi_images", images_to_json(d.stine.pi.images)},
              {"dim_K", d.stine.dim_K},
              {"V", to_json(d.stine.V)},
              {"Psi", to_json(d.rep.rep_map)},
              {"W", to_json(d.W)},
              {"residuals", {{"dilation", d.residual}}}};
}

inline Json to_json(const FactorizationCertificate& c) {
  return Json{{"schema", kSchemaName},
              {"kind", "cb-factorization-certificate"},
              {"phi", to_json(c.phi)},
              {"Gamma", to_json(c.Gamma)},
              {"S", to_json(c.S)},
              {"cb_upper", c.cb_upper},
              {"residuals", {{"factorization", c.residual}}}};
}

inline Json to_json(const CPExtensionCertificate& c) {
  return Json{{"schema", kSchemaName},
              {"kind", "cp-extension-certificate"},
              {"phi1", to_json(c.phi1)},
              {"phi2", to_json(c.phi2)},
              {"choi_min_eig", c.choi_min_eig}};
}

inline StinespringTriple stinespring_from_json(const Json& j, const BlockAlgebra& domain,
                                               Index dim_H) {
  StinespringTriple st;
  st.dim_K = index_from_json(require_field(j, "dim_K"), "dim_K");
  st.pi = OperatorMap{domain, st.dim_K, st.dim_K,
                      images_from_json(require_field(j, "pi_images"), domain.linear_dim(),
                                       st.dim_K, st.dim_K)};
  st.V = matrix_from_json(require_field(j, "V"), st.dim_K, dim_H);
  return st;
}

inline KolmogorovPair kolmogorov_from_json(const Json& j, Index num_points, Index dim_H) {
  KolmogorovPair p;
  p.dim_K = index_from_json(require_field(j, "dim_K"), "dim_K");
  const Json& nu = require_field(j, "nu");
  if (!nu.is_array() || static_cast<Index>(nu.size()) != num_points)
    throw SchemaError("kolmogorov certificate: wrong number of point operators");
  for (const Json& op : nu) p.nu.push_back(matrix_from_json(op, p.dim_K, dim_H));
  p.minimal = j.contains("minimal") && j.at("minimal").get<bool>();
  return p;
}

inline FactorizationCertificate factorization_from_json(const Json& j) {
  FactorizationCertificate c;
  c.phi = operator_map_from_json(require_field(j, "phi"));
  c.Gamma = module_map_from_json(require_field(j, "Gamma"));
  c.S = matrix_from_json(require_field(j, "S"), -1, -1);
  c.cb_upper = require_field(j, "cb_upper").get<double>();
  c.residual = j.contains("residuals") ? j.at("residuals").value("factorization", 0.0) : 0.0;
  return c;
}

inline CPExtensionCertificate cp_extension_from_json(const Json& j) {
  CPExtensionCertificate c;
  c.phi1 = operator_map_from_json(require_field(j, "phi1"));
  c.phi2 = operator_map_from_json(require_field(j, "phi2"));
  c.choi_min_eig = require_field(j, "choi_min_eig").get<double>();
  return c;
}

}  // namespace cstarmod
