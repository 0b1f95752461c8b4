#include "knotint/knot_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "knotint/rng.hpp"

namespace knotint {

namespace {

using nlohmann::json;

void eval_fourier_coord(const std::vector<std::pair<double, double>>& c, double s, double& f,
                        double& df) {
  f = 0.0;
  df = 0.0;
  for (size_t k = 0; k < c.size(); ++k) {
    double kk = static_cast<double>(k);
    double cs = std::cos(kk * s), sn = std::sin(kk * s);
    f += c[k].first * cs + c[k].second * sn;
    df += kk * (c[k].second * cs - c[k].first * sn);
  }
}

// periodic cubic spline second derivatives via cyclic tridiagonal solve
// (Sherman-Morrison on the (1,4,1) system)
std::vector<double> periodic_spline_m(const std::vector<double>& p, double h) {
  int m = static_cast<int>(p.size());
  std::vector<double> rhs(m);
  for (int i = 0; i < m; ++i) {
    double pm = p[(i + m - 1) % m], pc = p[i], pp = p[(i + 1) % m];
    rhs[i] = 6.0 * (pm - 2.0 * pc + pp) / (h * h);
  }
  auto solve_tridiag = [m](std::vector<double> b, std::vector<double> r) {
    // diag b, off-diagonals 1, no wrap; forward elimination
    std::vector<double> x(m);
    for (int i = 1; i < m; ++i) {
      double w = 1.0 / b[i - 1];
      b[i] -= w;
      r[i] -= w * r[i - 1];
    }
    x[m - 1] = r[m - 1] / b[m - 1];
    for (int i = m - 2; i >= 0; --i) x[i] = (r[i] - x[i + 1]) / b[i];
    return x;
  };
  if (m < 3) return std::vector<double>(m, 0.0);
  double gamma = -4.0;
  std::vector<double> b(m, 4.0);
  b[0] -= gamma;
  b[m - 1] -= 1.0 / gamma;
  std::vector<double> u(m, 0.0);
  u[0] = gamma;
  u[m - 1] = 1.0;
  std::vector<double> x = solve_tridiag(b, rhs);
  std::vector<double> q = solve_tridiag(b, u);
  double factor = (x[0] + x[m - 1] / gamma) / (1.0 + q[0] + q[m - 1] / gamma);
  for (int i = 0; i < m; ++i) x[i] -= factor * q[i];
  return x;
}

void build_spline(Curve& c) {
  int m = static_cast<int>(c.points.size());
  if (m < 3) throw ParseError("polyline needs at least 3 points");
  double h = kTwoPi / m;
  std::vector<double> px(m), py(m), pz(m);
  for (int i = 0; i < m; ++i) {
    px[i] = c.points[i].x;
    py[i] = c.points[i].y;
    pz[i] = c.points[i].z;
  }
  std::vector<double> mx = periodic_spline_m(px, h);
  std::vector<double> my = periodic_spline_m(py, h);
  std::vector<double> mz = periodic_spline_m(pz, h);
  c.spline_m.resize(m);
  for (int i = 0; i < m; ++i) c.spline_m[i] = {mx[i], my[i], mz[i]};
}

double wrap_angle(double s) {
  s = std::fmod(s, kTwoPi);
  return s < 0 ? s + kTwoPi : s;
}

}  // namespace

CurveSample eval_curve(const Curve& c, double s) {
  CurveSample out;
  if (c.repr == Curve::Repr::fourier) {
    double f, df;
    eval_fourier_coord(c.cx, s, f, df);
    out.position.x = f;
    out.tangent.x = df;
    eval_fourier_coord(c.cy, s, f, df);
    out.position.y = f;
    out.tangent.y = df;
    eval_fourier_coord(c.cz, s, f, df);
    out.position.z = f;
    out.tangent.z = df;
    return out;
  }
  int m = static_cast<int>(c.points.size());
  double h = kTwoPi / m;
  double t = wrap_angle(s);
  int i = std::min(static_cast<int>(t / h), m - 1);
  double t0 = i * h;
  double dl = t - t0, dr = h - dl;
  int j = (i + 1) % m;
  const Point3 &pi = c.points[i], &pj = c.points[j];
  const Point3 &mi = c.spline_m[i], &mj = c.spline_m[j];
  auto piece = [h, dl, dr](double p0, double p1, double m0, double m1, double& f, double& df) {
    f = m0 * dr * dr * dr / (6.0 * h) + m1 * dl * dl * dl / (6.0 * h) +
        (p0 - m0 * h * h / 6.0) * dr / h + (p1 - m1 * h * h / 6.0) * dl / h;
    df = -m0 * dr * dr / (2.0 * h) + m1 * dl * dl / (2.0 * h) - (p0 - m0 * h * h / 6.0) / h +
         (p1 - m1 * h * h / 6.0) / h;
  };
  double f, df;
  piece(pi.x, pj.x, mi.x, mj.x, f, df);
  out.position.x = f;
  out.tangent.x = df;
  piece(pi.y, pj.y, mi.y, mj.y, f, df);
  out.position.y = f;
  out.tangent.y = df;
  piece(pi.z, pj.z, mi.z, mj.z, f, df);
  out.position.z = f;
  out.tangent.z = df;
  return out;
}

double validate_embeddedness(Curve& c, double min_clearance) {
  const int m = 2048;
  std::vector<Point3> pts(m);
  std::vector<double> arc(m + 1, 0.0);
  Point3 prev;
  for (int i = 0; i < m; ++i) {
    pts[i] = eval_curve(c, kTwoPi * i / m).position;
    if (i > 0) arc[i] = arc[i - 1] + norm(pts[i] - pts[i - 1]);
  }
  double total = arc[m - 1] + norm(pts[0] - pts[m - 1]);
  double diam = 0.0;
  double clearance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      double chord = norm(pts[i] - pts[j]);
      diam = std::max(diam, chord);
      double along = arc[j] - arc[i];
      double arc_dist = std::min(along, total - along);
      if (chord < 0.5 * arc_dist) clearance = std::min(clearance, chord);
    }
  clearance = std::min(clearance, 0.5 * diam);
  if (!(clearance > min_clearance))
    throw EmbeddednessFailure("curve clearance " + std::to_string(clearance) +
                              " below threshold " + std::to_string(min_clearance));
  c.delta_emb = clearance;
  return clearance;
}

namespace {

std::vector<std::pair<double, double>> coeffs_from_json(const json& j) {
  std::vector<std::pair<double, double>> out;
  if (!j.is_array()) throw ParseError("fourier coefficient list must be an array");
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ParseError("fourier coefficient entries must be [a_k, b_k] numbers");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

json coeffs_to_json(const std::vector<std::pair<double, double>>& c) {
  json out = json::array();
  for (const auto& [a, b] : c) out.push_back({a, b});
  return out;
}

}  // namespace

Curve curve_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("bad curve JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type")) throw ParseError("curve JSON needs a 'type' field");
  std::string type = j["type"].get<std::string>();
  Curve c;
  if (type == "fourier") {
    if (!j.contains("coeffs")) throw ParseError("fourier curve needs 'coeffs'");
    const json& co = j["coeffs"];
    c.repr = Curve::Repr::fourier;
    c.cx = coeffs_from_json(co.at("x"));
    c.cy = coeffs_from_json(co.at("y"));
    c.cz = coeffs_from_json(co.at("z"));
  } else if (type == "polyline") {
    if (!j.contains("points")) throw ParseError("polyline curve needs 'points'");
    c.repr = Curve::Repr::polyline;
    for (const auto& p : j["points"]) {
      if (!p.is_array() || p.size() != 3) throw ParseError("polyline points must be [x,y,z]");
      c.points.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    build_spline(c);
  } else {
    throw ParseError("unknown curve type '" + type + "'");
  }
  validate_embeddedness(c);
  return c;
}

std::string curve_to_json_text(const Curve& c) {
  nlohmann::ordered_json j;
  if (c.repr == Curve::Repr::fourier) {
    j["type"] = "fourier";
    j["coeffs"]["x"] = coeffs_to_json(c.cx);
    j["coeffs"]["y"] = coeffs_to_json(c.cy);
    j["coeffs"]["z"] = coeffs_to_json(c.cz);
  } else {
    j["type"] = "polyline";
    json pts = json::array();
    for (const Point3& p : c.points) pts.push_back({p.x, p.y, p.z});
    j["points"] = pts;
  }
  return j.dump(2) + "\n";
}

Curve load_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open curve file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return curve_from_json_text(ss.str());
}

void save_curve(const Curve& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write curve file '" + path + "'");
  out << curve_to_json_text(c);
}

Curve builtin_knot(const std::string& name) {
  Curve c;
  c.repr = Curve::Repr::fourier;
  if (name == "unknot") {
    c.cx = {{0, 0}, {1, 0}};
    c.cy = {{0, 0}, {0, 1}};
    c.cz = {{0, 0}};
  } else if (name == "trefoil") {
    // (sin s + 2 sin 2s, cos s - 2 cos 2s, -sin 3s)
    c.cx = {{0, 0}, {0, 1}, {0, 2}};
    c.cy = {{0, 0}, {1, 0}, {-2, 0}};
    c.cz = {{0, 0}, {0, 0}, {0, 0}, {0, -1}};
  } else if (name == "figure8") {
    // ((2+cos 2s)cos 3s, (2+cos 2s)sin 3s, sin 4s) expanded in harmonics
    c.cx = {{0, 0}, {0.5, 0}, {0, 0}, {2, 0}, {0, 0}, {0.5, 0}};
    c.cy = {{0, 0}, {0, 0.5}, {0, 0}, {0, 2}, {0, 0}, {0, 0.5}};
    c.cz = {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 1}};
  } else {
    throw UnknownName("no builtin knot named '" + name + "'");
  }
  validate_embeddedness(c);
  return c;
}

Curve resolve_curve(const std::string& name_or_path) {
  if (name_or_path == "unknot" || name_or_path == "trefoil" || name_or_path == "figure8")
    return builtin_knot(name_or_path);
  std::ifstream probe(name_or_path);
  if (probe) return load_curve(name_or_path);
  throw UnknownName("'" + name_or_path + "' is neither a builtin knot nor a readable file");
}

Curve reverse_orientation(const Curve& c) {
  Curve out = c;
  if (c.repr == Curve::Repr::fourier) {
    for (auto& p : out.cx) p.second = -p.second;
    for (auto& p : out.cy) p.second = -p.second;
    for (auto& p : out.cz) p.second = -p.second;
  } else {
    int m = static_cast<int>(c.points.size());
    for (int i = 0; i < m; ++i) out.points[i] = c.points[(m - i) % m];
    build_spline(out);
  }
  return out;
}

Curve translate_curve(const Curve& c, const Vec3& offset) {
  Curve out = c;
  if (c.repr == Curve::Repr::fourier) {
    if (out.cx.empty()) out.cx.push_back({0, 0});
    if (out.cy.empty()) out.cy.push_back({0, 0});
    if (out.cz.empty()) out.cz.push_back({0, 0});
    out.cx[0].first += offset.x;
    out.cy[0].first += offset.y;
    out.cz[0].first += offset.z;
  } else {
    for (Point3& p : out.points) p = p + offset;
    build_spline(out);
  }
  return out;
}

namespace {

Vec3 rodrigues(const Vec3& v, const Vec3& k, double cs, double sn) {
  return cs * v + sn * cross(k, v) + (1.0 - cs) * dot(k, v) * k;
}

}  // namespace

Curve rotate_curve(const Curve& c, const Vec3& axis, double angle) {
  Vec3 k = normalized(axis);
  double cs = std::cos(angle), sn = std::sin(angle);
  Curve out = c;
  if (c.repr == Curve::Repr::fourier) {
    size_t n = std::max({c.cx.size(), c.cy.size(), c.cz.size()});
    out.cx.assign(n, {0, 0});
    out.cy.assign(n, {0, 0});
    out.cz.assign(n, {0, 0});
    for (size_t i = 0; i < n; ++i) {
      Vec3 a{i < c.cx.size() ? c.cx[i].first : 0.0, i < c.cy.size() ? c.cy[i].first : 0.0,
             i < c.cz.size() ? c.cz[i].first : 0.0};
      Vec3 b{i < c.cx.size() ? c.cx[i].second : 0.0, i < c.cy.size() ? c.cy[i].second : 0.0,
             i < c.cz.size() ? c.cz[i].second : 0.0};
      Vec3 ra = rodrigues(a, k, cs, sn), rb = rodrigues(b, k, cs, sn);
      out.cx[i] = {ra.x, rb.x};
      out.cy[i] = {ra.y, rb.y};
      out.cz[i] = {ra.z, rb.z};
    }
  } else {
    for (Point3& p : out.points) p = rodrigues(p, k, cs, sn);
    build_spline(out);
  }
  return out;
}

Curve mirror_curve_z(const Curve& c) {
  Curve out = c;
  if (c.repr == Curve::Repr::fourier) {
    for (auto& p : out.cz) {
      p.first = -p.first;
      p.second = -p.second;
    }
  } else {
    for (Point3& p : out.points) p.z = -p.z;
    build_spline(out);
  }
  return out;
}

Curve perturb_isotopy(const Curve& c, double amplitude, uint64_t seed) {
  Curve base = c;
  if (base.delta_emb == 0.0) validate_embeddedness(base);
  if (amplitude < 0.0 || amplitude >= 0.5 * base.delta_emb)
    throw EmbeddednessFailure("perturbation amplitude " + std::to_string(amplitude) +
                              " not below half the clearance " + std::to_string(base.delta_emb));
  if (amplitude == 0.0) return base;

  // random low-order harmonic displacement, scaled to the exact sup norm
  Rng rng = sample_stream(seed, 0x7065727475726221ull);
  const int kOrder = 3;
  std::vector<std::pair<double, double>> dx(kOrder + 1), dy(kOrder + 1), dz(kOrder + 1);
  for (int k = 0; k <= kOrder; ++k) {
    dx[k] = {rng.normal(), k ? rng.normal() : 0.0};
    dy[k] = {rng.normal(), k ? rng.normal() : 0.0};
    dz[k] = {rng.normal(), k ? rng.normal() : 0.0};
  }
  double sup = 0.0;
  for (int i = 0; i < 1024; ++i) {
    double s = kTwoPi * i / 1024, f, df;
    Vec3 d;
    eval_fourier_coord(dx, s, f, df);
    d.x = f;
    eval_fourier_coord(dy, s, f, df);
    d.y = f;
    eval_fourier_coord(dz, s, f, df);
    d.z = f;
    sup = std::max(sup, norm(d));
  }
  double scale = amplitude / sup;

  Curve out = base;
  if (base.repr == Curve::Repr::fourier) {
    auto grow = [kOrder](std::vector<std::pair<double, double>>& v) {
      if (static_cast<int>(v.size()) < kOrder + 1) v.resize(kOrder + 1, {0, 0});
    };
    grow(out.cx);
    grow(out.cy);
    grow(out.cz);
    for (int k = 0; k <= kOrder; ++k) {
      out.cx[k].first += scale * dx[k].first;
      out.cx[k].second += scale * dx[k].second;
      out.cy[k].first += scale * dy[k].first;
      out.cy[k].second += scale * dy[k].second;
      out.cz[k].first += scale * dz[k].first;
      out.cz[k].second += scale * dz[k].second;
    }
  } else {
    int m = static_cast<int>(out.points.size());
    for (int i = 0; i < m; ++i) {
      double s = kTwoPi * i / m, f, df;
      Vec3 d;
      eval_fourier_coord(dx, s, f, df);
      d.x = f;
      eval_fourier_coord(dy, s, f, df);
      d.y = f;
      eval_fourier_coord(dz, s, f, df);
      d.z = f;
      out.points[i] = out.points[i] + scale * d;
    }
    build_spline(out);
  }
  validate_embeddedness(out);
  return out;
}

Curve fit_fourier(const std::vector<Point3>& samples, int order) {
  int m = static_cast<int>(samples.size());
  if (m < 2 * order + 1) throw ParseError("not enough samples for the requested harmonic order");
  Curve c;
  c.repr = Curve::Repr::fourier;
  c.cx.assign(order + 1, {0, 0});
  c.cy.assign(order + 1, {0, 0});
  c.cz.assign(order + 1, {0, 0});
  for (int k = 0; k <= order; ++k) {
    double fac = (k == 0 ? 1.0 : 2.0) / m;
    double axx = 0, bxx = 0, ayy = 0, byy = 0, azz = 0, bzz = 0;
    for (int i = 0; i < m; ++i) {
      double s = kTwoPi * i / m;
      double cs = std::cos(k * s), sn = std::sin(k * s);
      axx += samples[i].x * cs;
      bxx += samples[i].x * sn;
      ayy += samples[i].y * cs;
      byy += samples[i].y * sn;
      azz += samples[i].z * cs;
      bzz += samples[i].z * sn;
    }
    c.cx[k] = {fac * axx, k ? fac * bxx : 0.0};
    c.cy[k] = {fac * ayy, k ? fac * byy : 0.0};
    c.cz[k] = {fac * azz, k ? fac * bzz : 0.0};
  }
  return c;
}

Curve reparametrize_curve(const Curve& c, double a, double b, int order) {
  if (std::abs(a) >= 1.0) throw ParseError("reparametrization needs |a| < 1");
  const int m = 4096;
  std::vector<Point3> samples(m);
  for (int i = 0; i < m; ++i) {
    double s = kTwoPi * i / m;
    samples[i] = eval_curve(c, s + a * std::sin(s + b)).position;
  }
  Curve out = fit_fourier(samples, order);
  validate_embeddedness(out);
  return out;
}

// ---------------------------------------------------------------------------
// projections

namespace {

struct ProjFrame {
  Vec3 e1, e2, d;
};

ProjFrame projection_frame(const Vec3& direction) {
  Vec3 d = normalized(direction);
  Vec3 pick = std::abs(d.x) <= std::abs(d.y) && std::abs(d.x) <= std::abs(d.z)
                  ? Vec3{1, 0, 0}
                  : (std::abs(d.y) <= std::abs(d.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
  Vec3 e1 = normalized(pick - dot(pick, d) * d);
  Vec3 e2 = cross(d, e1);  // (e1, e2, d) right-handed
  return {e1, e2, d};
}

struct ProjCurve {
  const Curve* curve;
  int id;
  int n;
  std::vector<double> px, py;  // projected sample points
};

ProjCurve project_samples(const Curve& c, int id, const ProjFrame& fr, int n) {
  ProjCurve pc;
  pc.curve = &c;
  pc.id = id;
  pc.n = n;
  pc.px.resize(n);
  pc.py.resize(n);
  for (int i = 0; i < n; ++i) {
    Point3 p = eval_curve(c, kTwoPi * i / n).position;
    pc.px[i] = dot(p, fr.e1);
    pc.py[i] = dot(p, fr.e2);
  }
  return pc;
}

struct SegRef {
  const ProjCurve* pc;
  int i;  // segment from sample i to i+1 (cyclic)
  double xmin, xmax, ymin, ymax;
};

inline double orient2(double ax, double ay, double bx, double by, double cx, double cy) {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

bool segments_cross(const SegRef& s, const SegRef& t) {
  int i = s.i, i2 = (s.i + 1) % s.pc->n;
  int j = t.i, j2 = (t.i + 1) % t.pc->n;
  double o1 = orient2(s.pc->px[i], s.pc->py[i], s.pc->px[i2], s.pc->py[i2], t.pc->px[j],
                      t.pc->py[j]);
  double o2 = orient2(s.pc->px[i], s.pc->py[i], s.pc->px[i2], s.pc->py[i2], t.pc->px[j2],
                      t.pc->py[j2]);
  double o3 = orient2(t.pc->px[j], t.pc->py[j], t.pc->px[j2], t.pc->py[j2], s.pc->px[i],
                      s.pc->py[i]);
  double o4 = orient2(t.pc->px[j], t.pc->py[j], t.pc->px[j2], t.pc->py[j2], s.pc->px[i2],
                      s.pc->py[i2]);
  return o1 * o2 < 0.0 && o3 * o4 < 0.0;
}

struct RawCrossing {
  const Curve* curve_a;
  const Curve* curve_b;
  int id_a, id_b;
  double sa, sb;  // refined parameters
};

// Newton refinement of the projected intersection.  Returns false on
// degeneracy (near-parallel projected tangents or no convergence).
bool refine_crossing(const Curve& ca, const Curve& cb, const ProjFrame& fr, double sa0, double sb0,
                     double scale, double& sa, double& sb) {
  sa = sa0;
  sb = sb0;
  for (int it = 0; it < 50; ++it) {
    CurveSample A = eval_curve(ca, sa), B = eval_curve(cb, sb);
    Vec3 diff = A.position - B.position;
    double f1 = dot(diff, fr.e1), f2 = dot(diff, fr.e2);
    double j11 = dot(A.tangent, fr.e1), j12 = -dot(B.tangent, fr.e1);
    double j21 = dot(A.tangent, fr.e2), j22 = -dot(B.tangent, fr.e2);
    double det = j11 * j22 - j12 * j21;
    if (std::abs(det) < 1e-9 * scale * scale) return false;
    double da = (f1 * j22 - f2 * j12) / det;
    double db = (j11 * f2 - j21 * f1) / det;
    sa -= da;
    sb -= db;
    if (std::abs(f1) + std::abs(f2) < 1e-12 * scale && std::abs(da) + std::abs(db) < 1e-12)
      return true;
  }
  return false;
}

// All projected crossings among one or two curves.  Throws DegenerateProjection
// on tangency-like behavior so the caller can retry with jitter.
std::vector<RawCrossing> raw_crossings(const std::vector<const Curve*>& curves,
                                       const ProjFrame& fr) {
  const int n = 2048;
  std::vector<ProjCurve> pcs;
  for (size_t k = 0; k < curves.size(); ++k)
    pcs.push_back(project_samples(*curves[k], static_cast<int>(k), fr, n));

  double scale = 0.0;
  std::vector<SegRef> segs;
  for (ProjCurve& pc : pcs)
    for (int i = 0; i < pc.n; ++i) {
      int j = (i + 1) % pc.n;
      SegRef s;
      s.pc = &pc;
      s.i = i;
      s.xmin = std::min(pc.px[i], pc.px[j]);
      s.xmax = std::max(pc.px[i], pc.px[j]);
      s.ymin = std::min(pc.py[i], pc.py[j]);
      s.ymax = std::max(pc.py[i], pc.py[j]);
      scale = std::max({scale, std::abs(s.xmax), std::abs(s.ymax)});
      segs.push_back(s);
    }

  // sweep over x intervals
  std::sort(segs.begin(), segs.end(), [](const SegRef& a, const SegRef& b) {
    return a.xmin < b.xmin;
  });
  std::vector<const SegRef*> active;
  std::vector<RawCrossing> out;
  bool two_curves = curves.size() == 2;
  for (const SegRef& s : segs) {
    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](const SegRef* t) { return t->xmax < s.xmin; }),
                 active.end());
    for (const SegRef* t : active) {
      if (t->ymax < s.ymin || s.ymax < t->ymin) continue;
      if (s.pc == t->pc) {
        if (two_curves) continue;  // linking: only inter-curve crossings
        int di = std::abs(s.i - t->i);
        if (di <= 1 || di >= s.pc->n - 1) continue;  // adjacent segments share a point
      }
      if (!segments_cross(s, *t)) continue;
      double sa0 = kTwoPi * (s.i + 0.5) / s.pc->n;
      double sb0 = kTwoPi * (t->i + 0.5) / t->pc->n;
      double sa, sb;
      if (!refine_crossing(*s.pc->curve, *t->pc->curve, fr, sa0, sb0, scale, sa, sb))
        throw DegenerateProjection("crossing refinement failed");
      RawCrossing rc;
      rc.curve_a = s.pc->curve;
      rc.curve_b = t->pc->curve;
      rc.id_a = s.pc->id;
      rc.id_b = t->pc->id;
      rc.sa = wrap_angle(sa);
      rc.sb = wrap_angle(sb);
      out.push_back(rc);
    }
    active.push_back(&s);
  }

  // dedupe (a crossing can be discovered from neighboring segment pairs)
  auto same_param = [](double a, double b) {
    double d = std::abs(a - b);
    return d < 1e-6 || kTwoPi - d < 1e-6;
  };
  std::vector<RawCrossing> unique;
  for (const RawCrossing& rc : out) {
    bool dup = false;
    for (const RawCrossing& u : unique) {
      if (rc.id_a == u.id_a && rc.id_b == u.id_b && same_param(rc.sa, u.sa) &&
          same_param(rc.sb, u.sb))
        dup = true;
      if (rc.id_a == u.id_b && rc.id_b == u.id_a && same_param(rc.sa, u.sb) &&
          same_param(rc.sb, u.sa))
        dup = true;
      if (dup) break;
    }
    if (!dup) unique.push_back(rc);
  }
  if (!two_curves) {
    // a self-crossing with nearly equal parameters signals a tangency
    for (const RawCrossing& rc : unique)
      if (same_param(rc.sa, rc.sb)) throw DegenerateProjection("self-tangency in projection");
  }
  return unique;
}

std::vector<Crossing> crossings_with_signs(const std::vector<const Curve*>& curves,
                                           const ProjFrame& fr) {
  std::vector<RawCrossing> raw = raw_crossings(curves, fr);
  double scale = 0.0;
  for (const Curve* c : curves)
    scale = std::max(scale, norm(eval_curve(*c, 0.0).position) + 1.0);
  std::vector<Crossing> out;
  for (const RawCrossing& rc : raw) {
    CurveSample A = eval_curve(*rc.curve_a, rc.sa);
    CurveSample B = eval_curve(*rc.curve_b, rc.sb);
    double ha = dot(A.position, fr.d), hb = dot(B.position, fr.d);
    if (std::abs(ha - hb) < 1e-9 * scale)
      throw DegenerateProjection("ambiguous over/under at a crossing");
    Crossing c;
    bool a_over = ha > hb;
    const CurveSample& over = a_over ? A : B;
    const CurveSample& under = a_over ? B : A;
    c.s_over = a_over ? rc.sa : rc.sb;
    c.s_under = a_over ? rc.sb : rc.sa;
    c.curve_over = a_over ? rc.id_a : rc.id_b;
    c.curve_under = a_over ? rc.id_b : rc.id_a;
    double cr = dot(over.tangent, fr.e1) * dot(under.tangent, fr.e2) -
                dot(over.tangent, fr.e2) * dot(under.tangent, fr.e1);
    if (std::abs(cr) < 1e-10) throw DegenerateProjection("grazing tangents at a crossing");
    c.sign = cr > 0 ? 1 : -1;
    out.push_back(c);
  }
  return out;
}

uint64_t hash_direction(const Vec3& d) {
  auto bits = [](double x) {
    uint64_t u;
    static_assert(sizeof(double) == sizeof(uint64_t));
    std::memcpy(&u, &x, sizeof(u));
    return u;
  };
  return mix_seed(bits(d.x) ^ (bits(d.y) * 3) ^ (bits(d.z) * 7), 0x70726f6au);
}

std::vector<Crossing> crossings_with_retry(const std::vector<const Curve*>& curves,
                                           const Vec3& direction) {
  Vec3 dir = direction;
  Rng jitter(hash_direction(direction));
  std::string last_error;
  for (int attempt = 0; attempt < 16; ++attempt) {
    try {
      return crossings_with_signs(curves, projection_frame(dir));
    } catch (const DegenerateProjection& e) {
      last_error = e.what();
      Vec3 j{jitter.normal(), jitter.normal(), jitter.normal()};
      dir = normalized(normalized(direction) + 0.01 * (attempt + 1) * j);
    }
  }
  throw DegenerateProjection("projection stayed degenerate after 16 jitter attempts: " +
                             last_error);
}

}  // namespace

std::vector<Crossing> projection_crossings(const Curve& c, const Vec3& direction) {
  return crossings_with_retry({&c}, direction);
}

GaussCode project_gauss_code(const Curve& c, const Vec3& direction) {
  std::vector<Crossing> crossings = crossings_with_retry({&c}, direction);
  struct Event {
    double s;
    int crossing;
    bool over;
  };
  std::vector<Event> events;
  for (size_t i = 0; i < crossings.size(); ++i) {
    events.push_back({crossings[i].s_over, static_cast<int>(i), true});
    events.push_back({crossings[i].s_under, static_cast<int>(i), false});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.s < b.s; });
  std::map<int, int> label_of;
  GaussCode gc;
  for (const Event& e : events) {
    auto [it, fresh] = label_of.try_emplace(e.crossing, static_cast<int>(label_of.size()) + 1);
    gc.entries.push_back({it->second, e.over, crossings[e.crossing].sign});
  }
  return gc;
}

int pv_v2(const GaussCode& gc) {
  struct Info {
    int over_pos = -1, under_pos = -1, sign = 0;
  };
  std::map<int, Info> info;
  for (size_t pos = 0; pos < gc.entries.size(); ++pos) {
    const GaussCodeEntry& e = gc.entries[pos];
    if (e.sign != 1 && e.sign != -1) throw MalformedCode("crossing sign must be +1 or -1");
    Info& inf = info[e.label];
    if (e.over) {
      if (inf.over_pos >= 0) throw MalformedCode("label seen over twice");
      inf.over_pos = static_cast<int>(pos);
    } else {
      if (inf.under_pos >= 0) throw MalformedCode("label seen under twice");
      inf.under_pos = static_cast<int>(pos);
    }
    if (inf.sign == 0)
      inf.sign = e.sign;
    else if (inf.sign != e.sign)
      throw MalformedCode("inconsistent signs for one crossing label");
  }
  for (const auto& [label, inf] : info)
    if (inf.over_pos < 0 || inf.under_pos < 0)
      throw MalformedCode("label must appear exactly once over and once under");
  int total = 0;
  for (const auto& [lc, c] : info)
    for (const auto& [ld, d] : info) {
      if (c.under_pos < d.over_pos && d.over_pos < c.over_pos && c.over_pos < d.under_pos)
        total += c.sign * d.sign;
    }
  return total;
}

int crossing_linking(const Curve& c1, const Curve& c2, const Vec3& direction) {
  std::vector<Crossing> crossings = crossings_with_retry({&c1, &c2}, direction);
  int sum = 0;
  for (const Crossing& c : crossings) sum += c.sign;
  if (sum % 2 != 0)
    throw DegenerateProjection("odd signed inter-curve crossing sum; projection unreliable");
  return sum / 2;
}

DirectionAverage writhe_oracle(const Curve& c, int n_directions, uint64_t seed) {
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n_directions; ++i) {
    Rng rng = sample_stream(seed, static_cast<uint64_t>(i));
    Vec3 dir;
    do {
      dir = {rng.normal(), rng.normal(), rng.normal()};
    } while (norm2(dir) < 1e-12);
    dir = normalized(dir);
    std::vector<Crossing> crossings = crossings_with_retry({&c}, dir);
    double w = 0.0;
    for (const Crossing& cr : crossings) w += cr.sign;
    sum += w;
    sumsq += w * w;
  }
  DirectionAverage out;
  out.n_directions = n_directions;
  out.mean = sum / n_directions;
  double var = (sumsq - sum * sum / n_directions) / std::max(1, n_directions - 1);
  out.std_error = std::sqrt(std::max(0.0, var) / n_directions);
  return out;
}

}  // namespace knotint
