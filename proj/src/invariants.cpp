#include "knotint/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace knotint {

namespace {

using nlohmann::json;

json edges_to_json(const std::vector<Edge>& edges) {
  json out = json::array();
  for (const Edge& e : edges) out.push_back({e.a, e.b});
  return out;
}

std::vector<Edge> edges_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("edge list must be an array");
  std::vector<Edge> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw ParseError("edges must be [a, b] integer pairs");
    out.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  return out;
}

int int_field(const json& j, const char* name, int fallback, bool required) {
  if (!j.contains(name)) {
    if (required) throw ParseError(std::string("missing field '") + name + "'");
    return fallback;
  }
  if (!j[name].is_number_integer()) throw ParseError(std::string("field '") + name +
                                                     "' must be an integer");
  return j[name].get<int>();
}

}  // namespace

CocycleSpec make_cocycle(int order) {
  if (order < 1) throw UnknownName("cocycle order must be positive");
  int total = 2 * order;
  if (total > kEnumerationVertexLimit)
    throw SizeLimit("builtin cocycles stop at order " +
                    std::to_string(kEnumerationVertexLimit / 2));
  std::vector<GraphSum> basis = cocycle_basis(total, Variant::knot, BasisFilter::prime);
  if (basis.empty()) throw NotCocycle("no prime cocycle at order " + std::to_string(order));
  CocycleSpec spec;
  spec.sum = basis.front();
  spec.order = order;
  if (order % 2 == 0) spec.mu = Rational(0);
  spec.source = "builtin-order-" + std::to_string(order);
  return spec;
}

std::string cocycle_to_json_text(const CocycleSpec& spec) {
  nlohmann::ordered_json j;
  Variant variant = spec.sum.variant.value_or(Variant::knot);
  j["variant"] = variant == Variant::knot ? "knot" : "closed";
  j["order"] = spec.order;
  if (spec.mu)
    j["mu"] = format_rational(*spec.mu);
  else
    j["mu"] = nullptr;
  if (spec.calibration)
    j["calibration"] = *spec.calibration;
  else
    j["calibration"] = nullptr;
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (const auto& [key, term] : spec.sum.terms) {
    nlohmann::ordered_json t;
    t["coeff"] = format_rational(term.coeff);
    if (term.variant == Variant::knot) {
      t["n_ext"] = term.knot.n_ext;
      t["n_int"] = term.knot.n_int;
      t["edges"] = edges_to_json(term.knot.internal_edges);
    } else {
      t["n_vertices"] = term.closed.n_vertices;
      t["edges"] = edges_to_json(term.closed.edges);
    }
    terms.push_back(t);
  }
  j["terms"] = terms;
  return j.dump(2) + "\n";
}

CocycleSpec cocycle_from_json_text(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad cocycle JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("terms")) throw ParseError("cocycle JSON needs 'terms'");
  std::string variant_name = j.value("variant", std::string("knot"));
  if (variant_name != "knot" && variant_name != "closed")
    throw ParseError("variant must be 'knot' or 'closed'");
  bool knot_variant = variant_name == "knot";

  CocycleSpec spec;
  spec.source = source;
  int default_ne = int_field(j, "n_ext", -1, false);
  int default_ni = int_field(j, "n_int", -1, false);
  int default_nv = int_field(j, "n_vertices", -1, false);
  for (const auto& t : j["terms"]) {
    if (!t.is_object() || !t.contains("coeff")) throw ParseError("term needs 'coeff'");
    Rational coeff = parse_rational(t["coeff"].get<std::string>());
    if (knot_variant) {
      KnotGraph g;
      g.n_ext = int_field(t, "n_ext", default_ne, default_ne < 0);
      g.n_int = int_field(t, "n_int", default_ni, default_ni < 0);
      g.internal_edges = edges_from_json(t.at("edges"));
      spec.sum.add(g, coeff);
    } else {
      LabeledGraph g;
      g.n_vertices = int_field(t, "n_vertices", default_nv, default_nv < 0);
      g.edges = edges_from_json(t.at("edges"));
      spec.sum.add(g, coeff);
    }
  }
  if (spec.sum.empty()) throw ParseError("cocycle has no surviving terms");

  if (j.contains("order") && j["order"].is_number_integer()) {
    spec.order = j["order"].get<int>();
  } else {
    const auto& first = spec.sum.terms.begin()->second;
    Rational o = first.variant == Variant::knot ? ord(first.knot) : ord(first.closed);
    if (denominator(o) != 1) throw ParseError("terms do not have integer order");
    spec.order = numerator(o).convert_to<int>();
  }
  if (j.contains("mu") && !j["mu"].is_null()) {
    spec.mu = parse_rational(j["mu"].get<std::string>());
  } else if (spec.order % 2 == 0) {
    spec.mu = Rational(0);
  }
  if (j.contains("calibration") && !j["calibration"].is_null()) {
    if (!j["calibration"].is_number()) throw ParseError("calibration must be a number");
    spec.calibration = j["calibration"].get<double>();
  }
  return spec;
}

CocycleSpec load_cocycle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cocycle file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return cocycle_from_json_text(ss.str(), path);
}

void save_cocycle(const CocycleSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write cocycle file '" + path + "'");
  out << cocycle_to_json_text(spec);
}

double linking_number(const Curve& c1, const Curve& c2, int mesh) {
  int N = std::max(mesh, 16);
  std::vector<Point3> p1(N), p2(N);
  std::vector<Vec3> t1(N), t2(N);
  for (int i = 0; i < N; ++i) {
    CurveSample a = eval_curve(c1, kTwoPi * i / N);
    CurveSample b = eval_curve(c2, kTwoPi * i / N);
    p1[i] = a.position;
    t1[i] = a.tangent;
    p2[i] = b.position;
    t2[i] = b.tangent;
  }
  double min_dist = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    double loc = 0.0;
    for (int j = 0; j < N; ++j) {
      Vec3 d = p1[i] - p2[j];
      double r = norm(d);
      min_dist = std::min(min_dist, r);
      loc += det3(t1[i], t2[j], d) / (r * r * r);
    }
    total += loc;
  }
  if (min_dist < 1e-6) throw CurvesIntersect("curves come within " + std::to_string(min_dist));
  double h = kTwoPi / N;
  return total * h * h / (4.0 * kPi);
}

Estimate self_linking(const Curve& c, int mesh) {
  KnotGraph chord;
  chord.n_ext = 2;
  chord.n_int = 0;
  chord.internal_edges = {{1, 2}};
  return chord_quadrature(c, chord, mesh);
}

namespace {

void validate_cocycle_terms(const CocycleSpec& spec) {
  if (!spec.sum.variant || *spec.sum.variant != Variant::knot)
    throw NotCocycle("knot-variant combination required");
  if (spec.sum.empty()) throw NotCocycle("empty combination");
  for (const auto& [key, term] : spec.sum.terms) {
    ValidationReport rep = validate_graph(term.knot);
    if (!rep.ok()) throw NotCocycle("term " + key + " invalid: " + rep.note);
    if (!is_prime(term.knot)) throw NotCocycle("term " + key + " is not prime");
  }
  GraphSum d = delta(spec.sum);
  if (!d.empty()) throw NotCocycle("combination is not closed under the coboundary");
}

}  // namespace

InvariantResult a_gamma(const Curve& c, const CocycleSpec& spec, uint64_t n_samples,
                        uint64_t seed, int workers, double rejection_cutoff) {
  validate_cocycle_terms(spec);
  InvariantResult out;
  out.n_samples = n_samples;
  out.seed = seed;
  double var = 0.0;
  uint64_t term_index = 0;
  for (const auto& [key, term] : spec.sum.terms) {
    const KnotGraph& g = term.knot;
    TermEstimate te;
    te.key = key;
    te.coeff = term.coeff;
    if (g.n_int == 0 && g.n_ext <= 4) {
      te.method = "quadrature";
      te.estimate = chord_quadrature(c, g, g.n_ext <= 2 ? 1024 : 2048);
    } else {
      te.method = "monte-carlo";
      te.estimate =
          mc_estimate(c, g, n_samples, mix_seed(seed, 1000 + term_index), workers,
                      rejection_cutoff);
      out.rejection_rate = std::max(out.rejection_rate, te.estimate.rejection_rate);
    }
    double coeff = to_double(term.coeff);
    out.value += coeff * te.estimate.value;
    var += coeff * coeff * te.estimate.std_error * te.estimate.std_error;
    out.terms.push_back(te);
    ++term_index;
  }
  out.std_error = std::sqrt(var);
  return out;
}

InvariantResult i_gamma(const Curve& c, const CocycleSpec& spec, uint64_t n_samples,
                        uint64_t seed, int workers, double rejection_cutoff) {
  if (spec.order % 2 == 1 && !spec.mu)
    throw UnknownAnomaly("odd order needs an explicit self-linking coefficient");
  InvariantResult out = a_gamma(c, spec, n_samples, seed, workers, rejection_cutoff);
  Rational mu = spec.mu.value_or(Rational(0));
  if (mu != 0) {
    TermEstimate te;
    te.key = "self-linking";
    te.coeff = mu;
    te.method = "self-linking";
    te.estimate = self_linking(c);
    double m = to_double(mu);
    out.value += m * te.estimate.value;
    out.std_error = std::sqrt(out.std_error * out.std_error +
                              m * m * te.estimate.std_error * te.estimate.std_error);
    out.terms.push_back(te);
  }
  if (spec.calibration) {
    out.value *= *spec.calibration;
    out.std_error *= std::abs(*spec.calibration);
  }
  return out;
}

double calibrate_cocycle(CocycleSpec& spec, const Curve& reference, double ref_value,
                         uint64_t n_samples, uint64_t seed, int workers) {
  std::optional<double> saved = spec.calibration;
  spec.calibration.reset();
  InvariantResult raw;
  try {
    raw = i_gamma(reference, spec, n_samples, seed, workers);
  } catch (...) {
    spec.calibration = saved;
    throw;
  }
  if (!(std::abs(raw.value) > 5.0 * raw.std_error))
    throw InsufficientSignal("reference estimate " + std::to_string(raw.value) + " +- " +
                             std::to_string(raw.std_error) + " is compatible with zero");
  double factor = ref_value / raw.value;
  spec.calibration = factor;
  return factor;
}

}  // namespace knotint
