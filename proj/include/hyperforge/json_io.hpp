#pragma once

#include <bit>
#include <string>

#include <json.hpp>

#include "hyperforge/conelink.hpp"
#include "hyperforge/exterior.hpp"
#include "hyperforge/hyperherm.hpp"
#include "hyperforge/instanton.hpp"
#include "hyperforge/rfm.hpp"

// JSON wire formats.  ordered_json keeps field order stable so identical
// inputs produce byte-identical output.

namespace hf {

using json = nlohmann::ordered_json;

// {"dim": N, "deg": k, "terms": [{"idx": [i1 < ... < ik], "re": x, "im": y}]}
// Terms are emitted in increasing basis order and only for nonzero
// coefficients; indices are 1-based.
inline json form_to_json(const Form& f) {
  json terms = json::array();
  const auto& masks = degree_masks(f.dim(), f.degree() <= f.dim() ? f.degree() : f.dim());
  if (f.degree() <= f.dim()) {
    for (std::size_t t = 0; t < masks.size(); ++t) {
      const cplx c = f[static_cast<int>(t)];
      if (c == cplx{0.0, 0.0}) continue;
      json idx = json::array();
      for (std::uint32_t mm = masks[t]; mm; mm &= mm - 1)
        idx.push_back(std::countr_zero(mm) + 1);
      terms.push_back({{"idx", std::move(idx)}, {"re", c.real()}, {"im", c.imag()}});
    }
  }
  return json{{"dim", f.dim()}, {"deg", f.degree()}, {"terms", std::move(terms)}};
}

inline Form form_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("deg") || !j.contains("terms"))
    throw structural_error("form json: need object with dim, deg, terms");
  if (!j["dim"].is_number_integer() || !j["deg"].is_number_integer() || !j["terms"].is_array())
    throw structural_error("form json: dim/deg must be integers, terms an array");
  const int N = j["dim"].get<int>();
  const int k = j["deg"].get<int>();
  if (N < 0 || N > kMaxDim || k < 0)
    throw structural_error("form json: dim/deg out of range");
  Form f(N, k);
  for (const auto& t : j["terms"]) {
    if (!t.is_object() || !t.contains("idx") || !t.contains("re") || !t.contains("im"))
      throw structural_error("form json: each term needs idx, re, im");
    const auto& idx = t["idx"];
    if (!idx.is_array() || static_cast<int>(idx.size()) != k)
      throw structural_error("form json: idx length must equal deg");
    std::uint32_t mask = 0;
    int prev = 0;
    for (const auto& ij : idx) {
      if (!ij.is_number_integer()) throw structural_error("form json: idx entries must be integers");
      const int i = ij.get<int>();
      if (i <= prev || i > N)
        throw structural_error("form json: idx must be strictly increasing in 1..dim");
      mask |= 1u << (i - 1);
      prev = i;
    }
    if (!t["re"].is_number() || !t["im"].is_number())
      throw structural_error("form json: re/im must be numbers");
    f.add_coeff(mask, cplx{t["re"].get<double>(), t["im"].get<double>()});
  }
  return f;
}

// {"eigs": [{"val": x, "mult": m}], "domain_dim": d}; eigenbasis forms are
// not serialized (they are working data, not wire data).
inline json spectrum_to_json(const SpectrumReport& rep) {
  json eigs = json::array();
  for (const auto& c : rep.eigs) eigs.push_back(json{{"val", c.val}, {"mult", c.mult}});
  return json{{"eigs", std::move(eigs)}, {"domain_dim", rep.domain_dim}};
}

// {"residuals": {label: value, ...}, "pass": b, "tol": t}; residual order is
// the checker's insertion order.
inline json report_to_json(const ConditionReport& r) {
  json res = json::object();
  for (const auto& [k, v] : r.residuals) res[k] = v;
  return json{{"residuals", std::move(res)}, {"pass", r.pass}, {"tol", r.tol}};
}

// {"rows": r, "cols": c, "data": [row-major entries]}
inline json matrix_to_json(const Eigen::MatrixXd& M) {
  json data = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) data.push_back(M(r, c));
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

inline json structure_to_json(const HyperHermitianStructure& s) {
  return json{{"n", s.n},
              {"dim", s.dim()},
              {"I", matrix_to_json(s.I)},
              {"J", matrix_to_json(s.J)},
              {"K", matrix_to_json(s.K)}};
}

// {"n": n, "h": [2n values], "A": [[row], ...], "B": ..., "C": ..., "G": ...}
// Matrices are nested row arrays, n rows of n numbers each.
inline json jet_to_json(const GraphJet& jet) {
  const auto rows = [](const Eigen::MatrixXd& M) {
    json out = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
      out.push_back(std::move(row));
    }
    return out;
  };
  json h = json::array();
  for (Eigen::Index i = 0; i < jet.h.size(); ++i) h.push_back(jet.h(i));
  return json{{"n", jet.n},   {"h", std::move(h)}, {"A", rows(jet.A)},
              {"B", rows(jet.B)}, {"C", rows(jet.C)}, {"G", rows(jet.G)}};
}

inline GraphJet jet_from_json(const json& j) {
  for (const char* key : {"n", "h", "A", "B", "C", "G"})
    if (!j.is_object() || !j.contains(key))
      throw structural_error("jet json: need object with n, h, A, B, C, G");
  if (!j["n"].is_number_integer())
    throw structural_error("jet json: n must be an integer");
  const int n = j["n"].get<int>();
  if (n < 1 || 4 * n > kMaxDim) throw structural_error("jet json: n out of range");
  const auto matrix = [&](const char* key) {
    const auto& rows = j[key];
    if (!rows.is_array() || static_cast<int>(rows.size()) != n)
      throw structural_error(std::string("jet json: ") + key + " must have n rows");
    Eigen::MatrixXd M(n, n);
    for (int r = 0; r < n; ++r) {
      const auto& row = rows[r];
      if (!row.is_array() || static_cast<int>(row.size()) != n)
        throw structural_error(std::string("jet json: ") + key +
                               " rows must have n numbers");
      for (int c = 0; c < n; ++c) {
        if (!row[c].is_number())
          throw structural_error(std::string("jet json: ") + key +
                                 " entries must be numbers");
        M(r, c) = row[c].get<double>();
      }
    }
    return M;
  };
  GraphJet jet;
  jet.n = n;
  const auto& h = j["h"];
  if (!h.is_array() || static_cast<int>(h.size()) != 2 * n)
    throw structural_error("jet json: h must have 2n numbers");
  jet.h = Eigen::VectorXd::Zero(2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    if (!h[i].is_number()) throw structural_error("jet json: h entries must be numbers");
    jet.h(i) = h[i].get<double>();
  }
  jet.A = matrix("A");
  jet.B = matrix("B");
  jet.C = matrix("C");
  jet.G = matrix("G");
  return jet;
}

// {"n": n, "p": [4n+4 numbers], "alpha": [3 forms], "sigma": [...],
//  "kappa": [...]}; the orthonormal frame itself is reconstructible from p
// and the seed, so only the geometric data is serialized.
inline json frame_to_json(const ConeLinkFrame& f) {
  json p = json::array();
  for (Eigen::Index i = 0; i < f.p.size(); ++i) p.push_back(f.p(i));
  const auto triple = [](const std::array<Form, 3>& fs) {
    json out = json::array();
    for (const Form& x : fs) out.push_back(form_to_json(x));
    return out;
  };
  return json{{"n", f.n},
              {"p", std::move(p)},
              {"alpha", triple(f.alpha)},
              {"sigma", triple(f.sigma)},
              {"kappa", triple(f.kappa)}};
}

}  // namespace hf
