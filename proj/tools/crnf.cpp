// crnf: normal forms of Levi-degenerate hypersurfaces of finite type in C^2.
//
// Exit codes: 0 success / Equivalent / pass, 1 NotEquivalent / fail,
// 2 Indeterminate, 3 input error, 4 internal invariant violation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "crnf/crnf.hpp"

using namespace crnf;

namespace {

enum Exit { kOk = 0, kFail = 1, kIndeterminate = 2, kInputError = 3, kInvariant = 4 };

struct Common {
  std::string backend;  // empty: from the document
  unsigned precision = 0;
  int weight = 0;
  bool json = false;
  std::string out;
};

struct Options {
  Common common;
  std::string input, input2;
  bool cross_check = false;
  std::string transform;
  // act
  std::string delta = "1", phase_re = "1", phase_im = "0", mu = "0";
  int rho = 0;
  // generate
  std::string model = "tube";
  int k = 4;
  unsigned long seed = 1;
  int tail_weight = 0;
  double density = 0.4;
  bool raw = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_weight = true) {
  cmd->add_option("--backend", c.backend, "exact or approx (default: the document's backend)")
      ->check(CLI::IsMember({"exact", "approx"}));
  cmd->add_option("--precision", c.precision, "approx backend precision in bits (default: NF_PRECISION_BITS or 128)")
      ->check(CLI::Range(16u, 100000u));
  if (with_weight) cmd->add_option("--weight", c.weight, "truncation weight (default 3k)")->check(CLI::Range(1, 100000));
  cmd->add_flag("--json", c.json, "print the JSON report instead of text");
  cmd->add_option("--out", c.out, "also write the JSON report to this file");
}

Backend choose_backend(const Common& c, const DocumentMeta& meta) {
  if (c.backend.empty()) return meta.backend;
  return c.backend == "exact" ? Backend::Exact : Backend::Approx;
}

unsigned choose_precision(const Common& c, const DocumentMeta& meta, bool doc_has_precision) {
  if (c.precision) return c.precision;
  if (const char* env = std::getenv("NF_PRECISION_BITS")) {
    try {
      const long v = std::stol(env);
      if (v < 16 || v > 100000) throw InputError("NF_PRECISION_BITS out of range");
      return static_cast<unsigned>(v);
    } catch (const std::logic_error&) {
      throw InputError("NF_PRECISION_BITS must be an integer");
    }
  }
  return doc_has_precision ? meta.precision_bits : 128u;
}

void write_report(const Json& report, const Common& c) {
  if (!c.out.empty()) {
    std::ofstream f(c.out);
    if (!f) throw InputError("cannot write '" + c.out + "'");
    f << report.dump(2) << "\n";
  }
  if (c.json) std::cout << report.dump(2) << "\n";
}

template <Scalar S>
std::string show(const S& x) {
  return to_display(x);
}

// ---------------------------------------------------------------------------

template <Scalar S>
int run_analyze(const Options& o, const Json& doc, DocumentMeta meta) {
  auto F = parse_surface<S>(doc, o.input);
  auto st = prepare(F, o.common.weight);
  Json rep = analyze_json(st, meta);
  write_report(rep, o.common);
  if (!o.common.json) {
    std::cout << "type k = " << st.k << ", class " << class_name(st.model.cls) << ", l = " << st.model.l
              << ", L = " << st.model.L << "\n";
    std::cout << "model P = " << st.model.poly(st.k).to_string() << "\n";
    std::cout << "beta = " << show(st.prefix.beta) << (st.prefix.sign_flip ? ", w -> -w" : "") << "\n";
    for (std::size_t j = 0; j < st.prefix.alpha.size(); ++j)
      if (!is_zero(st.prefix.alpha[j])) std::cout << "alpha_" << j << " = " << show(st.prefix.alpha[j]) << "\n";
    if (st.model.cls == ModelClass::Tube) std::cout << "tube constant C = " << tube_constant(st.k).get_str() << "\n";
  }
  return kOk;
}

template <Scalar S>
int run_normalize(const Options& o, const Json& doc, DocumentMeta meta) {
  auto F = parse_surface<S>(doc, o.input);
  NormalizeOptions opts;
  opts.cross_check = o.cross_check;
  auto R = normalize(F, o.common.weight, opts);
  Json rep = normalize_json(R, meta, o.cross_check);
  write_report(rep, o.common);
  if (!o.transform.empty()) {
    DocumentMeta mm = meta;
    std::ofstream f(o.transform);
    if (!f) throw InputError("cannot write '" + o.transform + "'");
    f << emit_map(R.T, mm).dump(2) << "\n";
  }
  if (!o.common.json) {
    std::cout << "type k = " << R.k << ", class " << class_name(R.model.cls) << ", weight " << R.W << "\n";
    std::cout << "normal form: " << R.nf.to_string() << "\n";
    std::cout << "f: " << R.T.f().to_string() << "\n";
    std::cout << "g: " << R.T.g().to_string() << "\n";
    int bad = 0;
    for (const auto& r : R.reports) bad += !(r.square && r.nonsingular && r.residual_ok);
    std::cout << R.reports.size() << " weight systems, " << bad << " irregular\n";
    if (o.cross_check) std::cout << "cross-check: " << (R.cross_ok() ? "match" : "MISMATCH") << "\n";
  }
  if (o.cross_check && !R.cross_ok()) {
    std::cerr << "error: explicit-formula cross-check mismatch\n";
    return kInvariant;
  }
  return kOk;
}

template <Scalar S>
SurfaceSeries<S> as_weighted(const SurfaceSeries<S>& F) {
  if (F.grading().weighted()) return F;
  int k = F.trunc() + 1;
  for (const auto& [key, c] : F.half())
    if (!is_zero(c)) k = std::min(k, key.i + key.j + key.m);
  if (k < 3 || k > F.trunc()) throw InputError("cannot determine a type k >= 3 from the lowest-degree terms");
  return F.regraded(Grading{k}, F.trunc());
}

template <Scalar S>
int run_verify(const Options& o, const Json& doc, DocumentMeta meta) {
  auto F = as_weighted(parse_surface<S>(doc, o.input));
  int W = o.common.weight > 0 ? std::min(o.common.weight, F.trunc()) : F.trunc();
  if (!o.transform.empty()) {
    auto T = parse_map<S>(read_json_file(o.transform), o.transform);
    if (T.grading() != F.grading()) throw InputError("map and surface have different type_k");
    F = apply_map(F, T, W);
  }
  const auto M = extract_model(F);
  auto chk = check_normal_form(F, M, W);
  std::string model_note;
  bool normalized = true;
  try {
    auto N = normalize_model(F, M);
    normalized = N.model.poly(M.k).near_equal(M.poly(M.k)) && !N.sign_flip;
  } catch (const NeedsApproxBackend&) {
    normalized = false;
  }
  if (!normalized) model_note = "model polynomial is not normalized (a_l = 1 and the argument conditions)";
  Json rep;
  rep["command"] = "verify";
  rep["backend"] = backend_name(meta.backend);
  rep["type_k"] = M.k;
  rep["class"] = class_name(M.cls);
  rep["model_normalized"] = normalized;
  rep["check"] = check_json(chk);
  const bool pass = chk.pass && normalized;
  rep["verdict"] = pass ? "pass" : "fail";
  write_report(rep, o.common);
  if (!o.common.json) {
    std::cout << (pass ? "pass" : "fail") << ": " << chk.rows_checked << " condition rows checked to weight " << W
              << "\n";
    if (!model_note.empty()) std::cout << "  " << model_note << "\n";
    for (const auto& f : chk.failures)
      std::cout << "  weight " << f.weight << ": " << f.label << " = " << show(f.value) << "\n";
  }
  return pass ? kOk : kFail;
}

template <Scalar S>
int run_equiv(const Options& o, const Json& doc1, const Json& doc2, DocumentMeta meta) {
  auto F1 = parse_surface<S>(doc1, o.input);
  auto F2 = parse_surface<S>(doc2, o.input2);
  auto R1 = normalize(F1, o.common.weight);
  auto R2 = normalize(F2, o.common.weight);
  EquivalenceVerdict<S> v;
  if (R1.k != R2.k) {
    v.outcome = Outcome::NotEquivalent;
    v.reason = "model mismatch: type " + std::to_string(R1.k) + " vs " + std::to_string(R2.k);
    v.W = std::min(R1.W, R2.W);
  } else {
    v = equivalence(R1.nf, R2.nf, std::min(R1.W, R2.W));
  }
  Json rep = equivalence_json(v, meta);
  write_report(rep, o.common);
  if (!o.common.json) {
    std::cout << outcome_name(v.outcome) << " (weight " << v.W << "): " << v.reason << "\n";
    if (v.witness) {
      const auto& h = *v.witness;
      std::cout << "witness: delta = " << show(h.delta);
      if (h.kind == GroupKind::GenericTube)
        std::cout << ", rho = " << h.rho << " (L = " << h.L << ")\n";
      else
        std::cout << ", phase = " << show(h.phase) << ", mu = " << show(h.mu) << "\n";
    }
  }
  switch (v.outcome) {
    case Outcome::Equivalent: return kOk;
    case Outcome::NotEquivalent: return kFail;
    case Outcome::Indeterminate: return kIndeterminate;
  }
  return kInvariant;
}

template <Scalar S>
int run_stab(const Options& o, const Json& doc, DocumentMeta meta) {
  auto R = normalize(parse_surface<S>(doc, o.input), o.common.weight);
  auto s = stability_dimension(R.nf, R.W);
  Json rep = stability_json(s, R.model.cls, meta.backend);
  write_report(rep, o.common);
  if (!o.common.json)
    std::cout << "estimate " << s.estimate << " (at weight " << s.W << "), bound " << s.bound << "\n";
  return kOk;
}

template <Scalar S>
S parse_number(const std::string& s, const char* what) {
  try {
    if constexpr (S::exact)
      return S::from_rational(GaussianRational::parse_component(s));
    else
      return S(BigComplex::parse_component(s), BigReal(0));
  } catch (const InputError& e) {
    throw InputError(std::string("--") + what + ": " + e.what());
  }
}

template <Scalar S>
int run_act(const Options& o, const Json& doc, DocumentMeta meta) {
  auto R = normalize(parse_surface<S>(doc, o.input), o.common.weight);
  const S delta = parse_number<S>(o.delta, "delta");
  SymmetryElement<S> h;
  if (R.model.cls == ModelClass::Circular) {
    const S phase = parse_number<S>(o.phase_re, "phase-re") + parse_number<S>(o.phase_im, "phase-im") * S::imag_unit();
    h = circular_element<S>(R.k, delta, phase, parse_number<S>(o.mu, "mu"));
  } else {
    h = generic_tube_element(R.model, delta, o.rho);
  }
  auto image = act(R.nf, h, R.W);
  DocumentMeta out = meta;
  Json rep = emit_surface(image, out);
  Common c = o.common;
  c.json = true;
  if (!o.common.out.empty()) {
    c.json = false;
    write_report(rep, c);
  } else {
    write_report(rep, c);
  }
  return kOk;
}

int run_generate(const Options& o) {
  Rng rng(o.seed);
  ModelClass cls;
  if (o.model == "tube")
    cls = ModelClass::Tube;
  else if (o.model == "circular")
    cls = ModelClass::Circular;
  else
    cls = ModelClass::Generic;
  using Q = GaussianRational;
  auto M = random_normalized_model<Q>(cls, o.k, rng);
  const int W = o.tail_weight > 0 ? o.tail_weight : (o.common.weight > 0 ? o.common.weight : 3 * o.k);
  if (W < o.k) throw InputError("--tail-weight below k");
  SurfaceSeries<Q> F = o.tail_weight > 0 ? random_surface<Q>(M, W, rng, o.density)
                                        : SurfaceSeries<Q>::from_poly(M.poly(W));
  if (o.raw) F = F.regraded(Grading{0}, W);
  DocumentMeta meta;
  Json rep = emit_surface(F, meta);
  Common c = o.common;
  c.json = o.common.out.empty();
  write_report(rep, c);
  return kOk;
}

template <class Fn>
int dispatch(const Common& c, const Json& doc, Fn&& fn) {
  DocumentMeta meta = read_meta(doc);
  meta.backend = choose_backend(c, meta);
  if (meta.backend == Backend::Approx) {
    meta.precision_bits = choose_precision(c, meta, doc.contains("precision_bits"));
    set_approx_precision(meta.precision_bits);
    return fn(BigComplex{}, meta);
  }
  return fn(GaussianRational{}, meta);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal forms of Levi-degenerate hypersurfaces of finite type in C^2"};
  app.require_subcommand(1);
  Options o;

  auto* analyze = app.add_subcommand("analyze", "type, harmonic removal, model polynomial and its class");
  analyze->add_option("file", o.input, "surface document")->required();
  add_common(analyze, o.common);

  auto* normalize_cmd = app.add_subcommand("normalize", "normal form and the normalizing transformation");
  normalize_cmd->add_option("file", o.input, "surface document")->required();
  normalize_cmd->add_flag("--cross-check", o.cross_check, "compare slices with the explicit formulas");
  normalize_cmd->add_option("--transform", o.transform, "write the transformation document to this file");
  add_common(normalize_cmd, o.common);

  auto* equiv = app.add_subcommand("equiv", "decide equivalence of two surfaces");
  equiv->add_option("file1", o.input, "first surface document")->required();
  equiv->add_option("file2", o.input2, "second surface document")->required();
  add_common(equiv, o.common);

  auto* stab = app.add_subcommand("stab", "stability group dimension estimate and bound");
  stab->add_option("file", o.input, "surface document")->required();
  add_common(stab, o.common);

  auto* verify = app.add_subcommand("verify", "check the normal-form conditions of a document");
  verify->add_option("file", o.input, "surface document")->required();
  verify->add_option("--transform", o.transform, "apply this map document before checking");
  add_common(verify, o.common);

  auto* act_cmd = app.add_subcommand("act", "normalize, apply an element of H, renormalize; prints the image");
  act_cmd->add_option("file", o.input, "surface document")->required();
  act_cmd->add_option("--delta", o.delta, "dilation (rational or decimal string)");
  act_cmd->add_option("--rho", o.rho, "rotation index (generic and tube models)");
  act_cmd->add_option("--phase-re", o.phase_re, "Re e^{i theta} (circular model)");
  act_cmd->add_option("--phase-im", o.phase_im, "Im e^{i theta} (circular model)");
  act_cmd->add_option("--mu", o.mu, "mu (circular model)");
  add_common(act_cmd, o.common);

  auto* gen = app.add_subcommand("generate", "emit a model or random surface document");
  gen->add_option("--model", o.model, "tube, circular or generic")->check(CLI::IsMember({"tube", "circular", "generic"}));
  gen->add_option("--k", o.k, "type k")->check(CLI::Range(3, 64));
  gen->add_option("--seed", o.seed, "random seed");
  gen->add_option("--tail-weight", o.tail_weight, "add a random tail up to this weight (0: model only)");
  gen->add_option("--density", o.density, "tail density")->check(CLI::Range(0.0, 1.0));
  gen->add_flag("--raw", o.raw, "emit in ordinary degree grading (type_k = 0)");
  gen->add_option("--out", o.common.out, "write the document to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (gen->parsed()) return run_generate(o);
    if (equiv->parsed()) {
      const Json d1 = read_json_file(o.input), d2 = read_json_file(o.input2);
      read_meta(d2, o.input2);
      return dispatch(o.common, d1, [&](auto tag, DocumentMeta meta) {
        return run_equiv<decltype(tag)>(o, d1, d2, meta);
      });
    }
    const Json doc = read_json_file(o.input);
    return dispatch(o.common, doc, [&](auto tag, DocumentMeta meta) {
      using S = decltype(tag);
      if (analyze->parsed()) return run_analyze<S>(o, doc, meta);
      if (normalize_cmd->parsed()) return run_normalize<S>(o, doc, meta);
      if (stab->parsed()) return run_stab<S>(o, doc, meta);
      if (verify->parsed()) return run_verify<S>(o, doc, meta);
      return run_act<S>(o, doc, meta);
    });
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInvariant;
  }
}
