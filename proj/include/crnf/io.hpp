#pragma once

// JSON documents: surfaces, maps and command reports.
//
// Surface document:
//   {"format_version": 1, "backend": "exact" | "approx", "precision_bits": 128,
//    "truncation_weight": W, "type_k": 0 | k,
//    "coefficients": [{"i": 2, "j": 2, "m": 0, "re": "1", "im": "0"}, ...]}
// type_k = 0 means ordinary degree (raw input); type_k = k > 0 means the
// weighted grading wt(u) = k. Records store i >= j; conjugates are implied.
//
// Map document (z* = z + f(z, w), w* = w + g(z, w)):
//   {"format_version": 1, "backend": ..., "truncation_weight": W, "type_k": k,
//    "f": [{"i": 1, "j": 1, "re": ..., "im": ...}], "g": [...]}
// with i the power of z and j the power of w.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include <json.hpp>

#include "crnf/nf.hpp"
#include "crnf/sym.hpp"

namespace crnf {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

struct DocumentMeta {
  Backend backend = Backend::Exact;
  unsigned precision_bits = 128;
  int truncation_weight = 0;
  int type_k = 0;
};

// ---------------------------------------------------------------------------
// Parsing helpers.

inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1, col = 1;
    for (std::size_t p = 0; p + 1 < e.byte && p < text.size(); ++p) {
      if (text[p] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

namespace detail {

inline const Json& require_field(const Json& doc, const char* name, const std::string& where) {
  if (!doc.is_object() || !doc.contains(name)) throw InputError(where + ": missing field \"" + name + "\"");
  return doc.at(name);
}

inline int require_int(const Json& doc, const char* name, const std::string& where, int min_value) {
  const Json& v = require_field(doc, name, where);
  if (!v.is_number_integer()) throw InputError(where + ": field \"" + name + "\" must be an integer");
  const long long x = v.get<long long>();
  if (x < min_value || x > 1'000'000) throw InputError(where + ": field \"" + name + "\" out of range");
  return static_cast<int>(x);
}

inline std::string number_string(const Json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw InputError(where + ": coefficients must be strings (\"p/q\" or decimal) or integers");
}

template <Scalar S>
S parse_scalar(const Json& rec, const std::string& where) {
  const std::string re = number_string(require_field(rec, "re", where), where);
  const std::string im = rec.contains("im") ? number_string(rec.at("im"), where) : std::string("0");
  try {
    if constexpr (S::exact) {
      return S::from_rational(GaussianRational::parse_component(re), GaussianRational::parse_component(im));
    } else {
      return S(BigComplex::parse_component(re), BigComplex::parse_component(im));
    }
  } catch (const InputError& e) {
    throw InputError(where + ": " + e.what());
  }
}

template <Scalar S>
Json scalar_json(const S& c) {
  Json o;
  o["re"] = str_re(c);
  o["im"] = str_im(c);
  return o;
}

}  // namespace detail

inline DocumentMeta read_meta(const Json& doc, const std::string& where = "document") {
  DocumentMeta meta;
  if (!doc.is_object()) throw InputError(where + ": top level must be an object");
  const int version = detail::require_int(doc, "format_version", where, 0);
  if (version != kFormatVersion) throw InputError(where + ": unsupported format_version " + std::to_string(version));
  if (doc.contains("backend")) {
    const auto& b = doc.at("backend");
    if (!b.is_string() || (b != "exact" && b != "approx"))
      throw InputError(where + ": backend must be \"exact\" or \"approx\"");
    meta.backend = b == "exact" ? Backend::Exact : Backend::Approx;
  }
  if (doc.contains("precision_bits")) meta.precision_bits = detail::require_int(doc, "precision_bits", where, 16);
  meta.truncation_weight = detail::require_int(doc, "truncation_weight", where, 2);
  meta.type_k = doc.contains("type_k") ? detail::require_int(doc, "type_k", where, 0) : 0;
  if (meta.type_k == 1 || meta.type_k == 2) throw InputError(where + ": type_k must be 0 (raw) or at least 3");
  return meta;
}

template <Scalar S>
SurfaceSeries<S> parse_surface(const Json& doc, const std::string& where = "document") {
  const DocumentMeta meta = read_meta(doc, where);
  const Grading gr{meta.type_k};
  SurfaceSeries<S> F(gr, meta.truncation_weight);
  const Json& list = detail::require_field(doc, "coefficients", where);
  if (!list.is_array()) throw InputError(where + ": \"coefficients\" must be an array");
  std::set<std::tuple<int, int, int>> seen;
  for (std::size_t n = 0; n < list.size(); ++n) {
    const Json& rec = list[n];
    std::string at = where + ": coefficients[" + std::to_string(n) + "]";
    const int i = detail::require_int(rec, "i", at, 0);
    const int j = detail::require_int(rec, "j", at, 0);
    const int m = detail::require_int(rec, "m", at, 0);
    at += " (" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(m) + ")";
    if (i < j) throw InputError(at + ": store conjugate-upper index only (i >= j)");
    if (!seen.emplace(i, j, m).second) throw InputError(at + ": duplicate record");
    if (i + j + m < 2) throw InputError(at + ": constant and linear terms are not allowed");
    if (gr.weight(i, j, m) > meta.truncation_weight)
      throw InputError(at + ": weight " + std::to_string(gr.weight(i, j, m)) + " exceeds the truncation weight");
    const S c = detail::parse_scalar<S>(rec, at);
    if (i == j && !is_real(c)) throw InputError(at + ": diagonal coefficient must be real");
    F.set(i, j, m, c);
  }
  return F;
}

template <Scalar S>
Json emit_surface(const SurfaceSeries<S>& F, const DocumentMeta& meta) {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["backend"] = backend_name(meta.backend);
  if (meta.backend == Backend::Approx) doc["precision_bits"] = meta.precision_bits;
  doc["truncation_weight"] = F.trunc();
  doc["type_k"] = F.grading().k;
  Json list = Json::array();
  for (const auto& [key, c] : F.half()) {
    Json rec;
    rec["i"] = key.i;
    rec["j"] = key.j;
    rec["m"] = key.m;
    rec["re"] = str_re(c);
    rec["im"] = str_im(c);
    list.push_back(rec);
  }
  doc["coefficients"] = list;
  return doc;
}

template <Scalar S>
MapSeries<S> parse_map(const Json& doc, const std::string& where = "map") {
  const DocumentMeta meta = read_meta(doc, where);
  if (meta.type_k < 3) throw InputError(where + ": maps need a weighted grading (type_k >= 3)");
  const Grading gr{meta.type_k};
  MapSeries<S> T(gr, meta.truncation_weight);
  for (const char* part : {"f", "g"}) {
    if (!doc.contains(part)) continue;
    const Json& list = doc.at(part);
    if (!list.is_array()) throw InputError(where + ": \"" + part + "\" must be an array");
    auto& h = std::string(part) == "f" ? T.f() : T.g();
    std::set<std::pair<int, int>> seen;
    for (std::size_t n = 0; n < list.size(); ++n) {
      std::string at = where + ": " + part + "[" + std::to_string(n) + "]";
      const int i = detail::require_int(list[n], "i", at, 0);
      const int j = detail::require_int(list[n], "j", at, 0);
      if (!seen.emplace(i, j).second) throw InputError(at + ": duplicate record");
      h.add(i, j, detail::parse_scalar<S>(list[n], at));
    }
  }
  if (auto v = T.violation_graph_form(); !v.empty()) throw InputError(where + ": " + v);
  if (auto v = T.violation_harmonic_free(); !v.empty()) throw InputError(where + ": " + v);
  return T;
}

template <Scalar S>
Json emit_holo(const HoloSeries<S>& h) {
  Json list = Json::array();
  for (const auto& [key, c] : h.terms()) {
    Json rec;
    rec["i"] = key.i;
    rec["j"] = key.j;
    rec["re"] = str_re(c);
    rec["im"] = str_im(c);
    list.push_back(rec);
  }
  return list;
}

template <Scalar S>
Json emit_map(const MapSeries<S>& T, const DocumentMeta& meta) {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["backend"] = backend_name(meta.backend);
  if (meta.backend == Backend::Approx) doc["precision_bits"] = meta.precision_bits;
  doc["truncation_weight"] = T.trunc();
  doc["type_k"] = T.grading().k;
  doc["f"] = emit_holo(T.f());
  doc["g"] = emit_holo(T.g());
  return doc;
}

// ---------------------------------------------------------------------------
// Reports.

template <Scalar S>
Json model_json(const ModelPolynomial<S>& M) {
  Json o;
  o["k"] = M.k;
  o["l"] = M.l;
  o["class"] = class_name(M.cls);
  Json a = Json::array();
  for (int j = 1; j < M.k; ++j) {
    if (is_zero(M.a[j])) continue;
    Json rec = detail::scalar_json(M.a[j]);
    rec["j"] = j;
    a.push_back(rec);
  }
  o["a"] = a;  // P = sum a_j z^j zbar^(k-j)
  o["m"] = M.m;
  o["L"] = M.L;
  o["q"] = M.q;
  return o;
}

template <Scalar S>
Json prefix_json(const PrefixMaps<S>& p) {
  Json o;
  Json alpha = Json::array();
  for (std::size_t j = 0; j < p.alpha.size(); ++j) {
    if (is_zero(p.alpha[j])) continue;
    Json rec = detail::scalar_json(p.alpha[j]);
    rec["j"] = static_cast<int>(j);
    alpha.push_back(rec);
  }
  o["alpha"] = alpha;  // w* = w + sum alpha_j z^j
  o["beta"] = detail::scalar_json(p.beta);  // z* = z / beta
  o["sign_flip"] = p.sign_flip;
  return o;
}

template <Scalar S>
Json check_json(const NormalFormCheck<S>& c) {
  Json o;
  o["pass"] = c.pass;
  o["weight"] = c.W;
  o["model_matches"] = c.model_matches;
  o["rows_checked"] = c.rows_checked;
  Json f = Json::array();
  for (const auto& x : c.failures) {
    Json rec = detail::scalar_json(x.value);
    rec["weight"] = x.weight;
    rec["condition"] = x.label;
    f.push_back(rec);
  }
  o["failures"] = f;
  return o;
}

template <Scalar S>
Json analyze_json(const PrefixStage<S>& st, const DocumentMeta& meta) {
  Json o;
  o["command"] = "analyze";
  o["backend"] = backend_name(meta.backend);
  o["raw_input"] = st.raw;
  o["type_k"] = st.k;
  o["truncation_weight"] = st.W;
  o["model"] = model_json(st.model);
  o["prefix"] = prefix_json(st.prefix);
  if (st.model.cls == ModelClass::Tube) o["tube_constant"] = tube_constant(st.k).get_str();
  return o;
}

template <Scalar S>
Json normalize_json(const NormalFormResult<S>& r, const DocumentMeta& meta, bool cross_check) {
  Json o;
  o["command"] = "normalize";
  o["backend"] = backend_name(meta.backend);
  o["raw_input"] = r.raw_input;
  o["type_k"] = r.k;
  o["truncation_weight"] = r.W;
  o["model"] = model_json(r.model);
  o["prefix"] = prefix_json(r.prefix);
  if (r.tube_C) o["tube_constant"] = r.tube_C->get_str();
  DocumentMeta out = meta;
  out.type_k = r.k;
  out.truncation_weight = r.W;
  o["normal_form"] = emit_surface(r.nf, out);
  o["transformation"] = emit_map(r.T, out);
  Json weights = Json::array();
  for (const auto& rep : r.reports) {
    Json w;
    w["mu"] = rep.mu;
    w["unknowns"] = rep.unknowns;
    w["conditions"] = rep.conditions;
    w["square"] = rep.square;
    w["nonsingular"] = rep.nonsingular;
    w["residual_ok"] = rep.residual_ok;
    if (cross_check) {
      Json cc;
      cc["entries"] = rep.cross.size();
      Json bad = Json::array();
      for (const auto& e : rep.cross)
        if (!e.match) bad.push_back(e.label);
      cc["mismatches"] = bad;
      w["cross_check"] = cc;
    }
    weights.push_back(w);
  }
  o["weights"] = weights;
  o["check"] = check_json(r.check);
  o["round_trip_ok"] = r.round_trip_ok;
  if (cross_check) o["cross_check_ok"] = r.cross_ok();
  return o;
}

template <Scalar S>
Json element_json(const SymmetryElement<S>& h) {
  Json o;
  o["group"] = group_kind_name(h.kind);
  o["k"] = h.k;
  o["delta"] = str_re(h.delta);
  if (h.kind == GroupKind::GenericTube) {
    o["L"] = h.L;
    o["rho"] = h.rho;
  } else {
    o["phase"] = detail::scalar_json(h.phase);
    o["mu"] = str_re(h.mu);
  }
  return o;
}

template <Scalar S>
Json equivalence_json(const EquivalenceVerdict<S>& v, const DocumentMeta& meta) {
  Json o;
  o["command"] = "equiv";
  o["backend"] = backend_name(meta.backend);
  o["truncation_weight"] = v.W;
  o["outcome"] = outcome_name(v.outcome);
  o["reason"] = v.reason;
  o["candidates_tried"] = v.candidates_tried;
  if (v.witness) o["witness"] = element_json(*v.witness);
  return o;
}

inline Json stability_json(const StabilityEstimate& s, ModelClass cls, Backend backend) {
  Json o;
  o["command"] = "stab";
  o["backend"] = backend_name(backend);
  o["class"] = class_name(cls);
  o["truncation_weight"] = s.W;
  o["estimate"] = s.estimate;
  o["bound"] = s.bound;
  o["note"] = "estimate is the dimension of the subgroup of H fixing the normal form to the truncation weight; "
              "the bound holds for the germ";
  return o;
}

}  // namespace crnf
