#include "knotint/config_integrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace knotint {

namespace {

constexpr uint64_t kBlockSize = 8192;
constexpr int kMaxComponents = 8;
constexpr int kMaxRetries = 100;

const double kFactorial[13] = {1,      1,       2,        6,        24,       120,     720,
                               5040,   40320,   362880,   3628800,  39916800, 479001600};

// heavy-tailed radial profile for importance anchors
inline double radial_density(double r, double lambda) {
  return (2.0 / kPi) * lambda / (lambda * lambda + r * r);
}

// 3-D density at displacement r of the isotropic profile
inline double point_density3(double r, double lambda) {
  return radial_density(r, lambda) / (4.0 * kPi * r * r);
}

inline Vec3 random_unit(Rng& rng) {
  double z = 2.0 * rng.uniform() - 1.0;
  double phi = kTwoPi * rng.uniform();
  double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {rho * std::cos(phi), rho * std::sin(phi), z};
}

inline int pick_index(Rng& rng, int k) {
  int i = static_cast<int>(rng.uniform() * k);
  return i < k ? i : k - 1;
}

}  // namespace

KnotSampler make_sampler(const Curve& c, int n_knot, int n_free, double rejection_cutoff) {
  if (n_knot < 0 || n_free < 0 || n_knot > 12 || n_free > 4)
    throw SizeLimit("sampler supports at most 12 knot points and 4 free points");
  KnotSampler s;
  s.curve = &c;
  s.n_knot = n_knot;
  s.n_free = n_free;
  s.rejection_cutoff = rejection_cutoff;

  const int kProbe = 512;
  Point3 lo = eval_curve(c, 0.0).position, hi = lo;
  for (int i = 1; i < kProbe; ++i) {
    Point3 p = eval_curve(c, kTwoPi * i / kProbe).position;
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
    hi.z = std::max(hi.z, p.z);
  }
  Vec3 ext = hi - lo;
  s.diameter = norm(ext);
  if (!(s.diameter > 0)) throw CoincidentPoints("curve degenerates to a point");
  Point3 center = lo + 0.5 * ext;
  // inflate the bounding half-extents, with a floor so flat curves still get a
  // full 3-D proposal box
  Vec3 half{std::max(0.5 * ext.x, 0.25 * s.diameter), std::max(0.5 * ext.y, 0.25 * s.diameter),
            std::max(0.5 * ext.z, 0.25 * s.diameter)};
  half = 3.0 * half;
  s.box_lo = center - half;
  s.box_hi = center + half;
  s.box_volume = 8.0 * half.x * half.y * half.z;

  const int kAnchors = 256;
  s.anchors.reserve(kAnchors);
  for (int a = 0; a < kAnchors; ++a)
    s.anchors.push_back(eval_curve(c, kTwoPi * a / kAnchors).position);
  s.lambda_anchor = s.diameter / 8.0;
  s.lambda_local = s.diameter / 32.0;
  return s;
}

double free_point_density(const KnotSampler& s, const std::vector<Point3>& knot_positions,
                          const Point3& y) {
  double q = 0.0;
  if (y.x >= s.box_lo.x && y.x <= s.box_hi.x && y.y >= s.box_lo.y && y.y <= s.box_hi.y &&
      y.z >= s.box_lo.z && y.z <= s.box_hi.z)
    q += 0.5 / s.box_volume;
  double anchor_share = knot_positions.empty() ? 1.0 : 0.75;
  double tail = 0.0;
  double per = anchor_share / static_cast<double>(s.anchors.size());
  for (const Point3& a : s.anchors) tail += per * point_density3(norm(y - a), s.lambda_anchor);
  if (!knot_positions.empty()) {
    double perk = 0.25 / static_cast<double>(knot_positions.size());
    for (const Point3& k : knot_positions)
      tail += perk * point_density3(norm(y - k), s.lambda_local);
  }
  return q + 0.5 * tail;
}

DrawResult sample_configuration(const KnotSampler& s, Rng& rng) {
  DrawResult out;
  int n = s.n_knot;
  std::vector<Point3> kpos;
  double u[12];
  std::vector<Point3> all;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    double weight = 1.0;
    out.cfg.s.clear();
    out.cfg.y.clear();
    kpos.clear();
    if (n > 0) {
      for (int i = 0; i < n; ++i) u[i] = rng.uniform();
      std::sort(u, u + n);
      int rot = n > 1 ? pick_index(rng, n) : 0;
      for (int l = 0; l < n; ++l) out.cfg.s.push_back(kTwoPi * u[(l + rot) % n]);
      weight *= std::pow(kTwoPi, n) / kFactorial[n - 1];
      for (int l = 0; l < n; ++l) kpos.push_back(eval_curve(*s.curve, out.cfg.s[l]).position);
    }
    for (int f = 0; f < s.n_free; ++f) {
      Point3 y;
      if (rng.uniform() < 0.5) {
        y = {s.box_lo.x + rng.uniform() * (s.box_hi.x - s.box_lo.x),
             s.box_lo.y + rng.uniform() * (s.box_hi.y - s.box_lo.y),
             s.box_lo.z + rng.uniform() * (s.box_hi.z - s.box_lo.z)};
      } else {
        double sub = rng.uniform();
        Point3 anchor;
        double lam;
        if (kpos.empty() || sub < 0.75) {
          anchor = s.anchors[pick_index(rng, static_cast<int>(s.anchors.size()))];
          lam = s.lambda_anchor;
        } else {
          anchor = kpos[pick_index(rng, n)];
          lam = s.lambda_local;
        }
        double r = lam * std::tan(0.5 * kPi * rng.uniform());
        y = anchor + r * random_unit(rng);
      }
      weight /= free_point_density(s, kpos, y);
      out.cfg.y.push_back(y);
    }
    all.clear();
    all.insert(all.end(), kpos.begin(), kpos.end());
    all.insert(all.end(), out.cfg.y.begin(), out.cfg.y.end());
    bool clash = false;
    for (size_t i = 0; i < all.size() && !clash; ++i)
      for (size_t j = i + 1; j < all.size(); ++j)
        if (norm(all[i] - all[j]) < s.rejection_cutoff) {
          clash = true;
          break;
        }
    if (clash) {
      ++out.rejects;
      continue;
    }
    out.cfg.weight = weight;
    out.ok = true;
    return out;
  }
  out.ok = false;
  return out;
}

MultiEstimate run_blocked_mc(uint64_t n_samples, uint64_t seed, int workers, int n_components,
                             const SampleKernel& kernel) {
  if (n_components < 1 || n_components > kMaxComponents)
    throw DimensionMismatch("component count out of range");
  if (n_samples == 0) throw DimensionMismatch("need at least one sample");
  uint64_t n_blocks = (n_samples + kBlockSize - 1) / kBlockSize;
  std::vector<double> bsum(n_blocks * n_components, 0.0), bsq(n_blocks * n_components, 0.0);
  std::vector<uint64_t> brej(n_blocks, 0);

  auto run_block = [&](uint64_t b) {
    double ls[kMaxComponents] = {0}, lq[kMaxComponents] = {0};
    double vals[kMaxComponents];
    uint64_t rej = 0;
    uint64_t lo = b * kBlockSize, hi = std::min<uint64_t>(n_samples, lo + kBlockSize);
    for (uint64_t i = lo; i < hi; ++i) {
      Rng rng = sample_stream(seed, i);
      for (int c = 0; c < n_components; ++c) vals[c] = 0.0;
      rej += static_cast<uint64_t>(kernel(i, rng, vals));
      for (int c = 0; c < n_components; ++c) {
        ls[c] += vals[c];
        lq[c] += vals[c] * vals[c];
      }
    }
    for (int c = 0; c < n_components; ++c) {
      bsum[b * n_components + c] = ls[c];
      bsq[b * n_components + c] = lq[c];
    }
    brej[b] = rej;
  };

#ifdef _OPENMP
  if (workers > 1) {
    std::exception_ptr error;
#pragma omp parallel for schedule(static) num_threads(workers)
    for (long long b = 0; b < static_cast<long long>(n_blocks); ++b) {
      try {
        run_block(static_cast<uint64_t>(b));
      } catch (...) {
#pragma omp critical
        {
          if (!error) error = std::current_exception();
        }
      }
    }
    if (error) std::rethrow_exception(error);
  } else
#endif
  {
    for (uint64_t b = 0; b < n_blocks; ++b) run_block(b);
  }

  MultiEstimate out;
  out.n_samples = n_samples;
  out.seed = seed;
  out.value.assign(n_components, 0.0);
  out.std_error.assign(n_components, 0.0);
  std::vector<double> tsum(n_components, 0.0), tsq(n_components, 0.0);
  uint64_t trej = 0;
  for (uint64_t b = 0; b < n_blocks; ++b) {
    for (int c = 0; c < n_components; ++c) {
      tsum[c] += bsum[b * n_components + c];
      tsq[c] += bsq[b * n_components + c];
    }
    trej += brej[b];
  }
  double n = static_cast<double>(n_samples);
  for (int c = 0; c < n_components; ++c) {
    out.value[c] = tsum[c] / n;
    double var = n > 1 ? std::max(0.0, (tsq[c] - tsum[c] * tsum[c] / n) / (n - 1.0)) : 0.0;
    out.std_error[c] = std::sqrt(var / n);
  }
  out.rejection_rate = static_cast<double>(trej) / static_cast<double>(n_samples + trej);
  return out;
}

double graph_integrand(const EvaluatedConfiguration& ec, const KnotGraph& g) {
  if (ec.n_knot != g.n_ext || ec.n_free != g.n_int)
    throw DimensionMismatch("configuration does not match the graph");
  int E = static_cast<int>(g.internal_edges.size());
  if (2 * E != ec.dim())
    throw DegreeMismatch("edge count " + std::to_string(E) +
                         " does not give a top form on dimension " + std::to_string(ec.dim()));
  if (E == 0) return 1.0;
  if (ec.dim() > kMaxFormDim) throw SizeLimit("domain dimension exceeds the wedge limit");

  thread_local std::vector<TwoFormMatrix> mats;
  thread_local std::vector<const TwoFormMatrix*> ptrs;
  if (static_cast<int>(mats.size()) < E) mats.resize(E);
  ptrs.clear();
  // repeated edges share one matrix so the wedge can use multiplicities
  int n_mats = 0;
  for (int i = 0; i < E; ++i) {
    const Edge& e = g.internal_edges[i];
    const TwoFormMatrix* found = nullptr;
    for (int k = 0; k < i; ++k)
      if (g.internal_edges[k] == e) {
        found = ptrs[k];
        break;
      }
    if (found == nullptr) {
      TwoFormMatrix& m = mats[n_mats++];
      m.reset(ec.dim());
      edge_form_points(ec, e.a, e.b, m);
      found = &m;
    }
    ptrs.push_back(found);
  }
  return wedge_top_evaluate(ptrs);
}

Estimate mc_estimate(const Curve& c, const KnotGraph& g, uint64_t n_samples, uint64_t seed,
                     int workers, double rejection_cutoff) {
  int E = static_cast<int>(g.internal_edges.size());
  if (2 * E != g.n_ext + 3 * g.n_int)
    throw DegreeMismatch("graph does not carry a top-degree integrand");
  for (const Edge& e : g.internal_edges)
    if (e.a < 1 || e.b <= e.a || e.b > total_vertices(g))
      throw InvalidEdge("edge endpoint out of range");
  KnotSampler sampler = make_sampler(c, g.n_ext, g.n_int, rejection_cutoff);
  SampleKernel kernel = [&sampler, &c, &g](uint64_t, Rng& rng, double* vals) -> int {
    DrawResult d = sample_configuration(sampler, rng);
    if (!d.ok) {
      vals[0] = 0.0;
      return d.rejects;
    }
    EvaluatedConfiguration ec = evaluate_configuration(d.cfg, c);
    vals[0] = graph_integrand(ec, g) * d.cfg.weight;
    return d.rejects;
  };
  MultiEstimate m = run_blocked_mc(n_samples, seed, workers, 1, kernel);
  return {m.value[0], m.std_error[0], n_samples, seed, m.rejection_rate};
}

// ---------------------------------------------------------------------------
// chord-diagram quadrature

namespace {

double chord_quad_pass(const Curve& c, const KnotGraph& g, int N, double sigma) {
  int n = g.n_ext;
  std::vector<Point3> pos(N);
  std::vector<Vec3> tan(N);
  for (int i = 0; i < N; ++i) {
    CurveSample cs = eval_curve(c, kTwoPi * i / N);
    pos[i] = cs.position;
    tan[i] = cs.tangent;
  }
  std::vector<double> K(static_cast<size_t>(N) * N, 0.0);
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      Vec3 d = pos[i] - pos[j];
      double r = norm(d);
      double v = det3(tan[i], tan[j], d) / (4.0 * kPi * r * r * r);
      K[static_cast<size_t>(i) * N + j] = v;
      K[static_cast<size_t>(j) * N + i] = v;  // symmetric under point exchange
    }
  auto KK = [&](int i, int j) { return K[static_cast<size_t>(i) * N + j]; };

  int nc = static_cast<int>(g.internal_edges.size());
  // label l (1-based) sits at tuple slot (l-1+r) mod n for rotation r
  int pa[4][2], pb[4][2];
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < nc; ++k) {
      pa[r][k] = (g.internal_edges[k].a - 1 + r) % n;
      pb[r][k] = (g.internal_edges[k].b - 1 + r) % n;
    }

  double h = kTwoPi / N;
  double total = 0.0;
  if (n == 2) {
    for (int i = 0; i < N; ++i) {
      double loc = 0.0;
      for (int j = i + 1; j < N; ++j) loc += 2.0 * KK(i, j);
      total += loc;
    }
  } else {  // n == 4
    // The sum over increasing 4-tuples factorizes through prefix sums, so each
    // of the three possible slot pairings costs O(N^2) instead of O(N^4).
    size_t sz = static_cast<size_t>(N) * N;
    std::vector<double> cp(sz, 0.0);   // cp[j*N+k]  = sum_{i<=j} K(i,k)
    std::vector<double> rs(sz, 0.0);   // rs[i*N+k]  = sum_{l>=k} K(i,l)
    std::vector<double> crs(sz, 0.0);  // crs[j*N+k] = sum_{i<=j} rs(i,k)
    for (int k = 0; k < N; ++k) {
      cp[k] = KK(0, k);
      for (int j = 1; j < N; ++j)
        cp[static_cast<size_t>(j) * N + k] = cp[static_cast<size_t>(j - 1) * N + k] + KK(j, k);
    }
    for (int i = 0; i < N; ++i) {
      rs[static_cast<size_t>(i) * N + N - 1] = KK(i, N - 1);
      for (int k = N - 2; k >= 0; --k)
        rs[static_cast<size_t>(i) * N + k] = rs[static_cast<size_t>(i) * N + k + 1] + KK(i, k);
    }
    for (int k = 0; k < N; ++k) {
      crs[k] = rs[k];
      for (int j = 1; j < N; ++j)
        crs[static_cast<size_t>(j) * N + k] =
            crs[static_cast<size_t>(j - 1) * N + k] + rs[static_cast<size_t>(j) * N + k];
    }
    // slot patterns over t0<t1<t2<t3: seq = K(t0,t1)K(t2,t3), cross = K(t0,t2)K(t1,t3),
    // nest = K(t0,t3)K(t1,t2)
    double s_seq = 0.0, s_cross = 0.0, s_nest = 0.0;
    std::vector<double> tri(N + 1, 0.0);  // tri[k] = sum_{i<j<k} K(i,j)
    for (int k = 2; k <= N; ++k)
      tri[k] = tri[k - 1] + cp[static_cast<size_t>(k - 2) * N + k - 1];
    for (int k = 0; k < N; ++k)
      for (int l = k + 1; l < N; ++l) s_seq += KK(k, l) * tri[k];
    for (int j = 1; j < N; ++j)
      for (int k = j + 1; k + 1 < N; ++k) {
        s_cross += cp[static_cast<size_t>(j - 1) * N + k] * rs[static_cast<size_t>(j) * N + k + 1];
        s_nest += KK(j, k) * crs[static_cast<size_t>(j - 1) * N + k + 1];
      }
    const double* sums[4] = {nullptr, &s_seq, &s_cross, &s_nest};
    for (int r = 0; r < 4; ++r) {
      int partner = 0;
      for (int k = 0; k < 2; ++k) {
        if (pa[r][k] == 0) partner = pb[r][k];
        if (pb[r][k] == 0) partner = pa[r][k];
      }
      total += *sums[partner];
    }
  }
  return sigma * total * std::pow(h, n);
}

}  // namespace

Estimate chord_quadrature(const Curve& c, const KnotGraph& g, int mesh) {
  if (g.n_int != 0) throw NotChordDiagram("graph has internal vertices");
  int n = g.n_ext;
  int nc = static_cast<int>(g.internal_edges.size());
  if (n == 0 || 2 * nc != n) throw NotChordDiagram("chords must perfectly pair the loop points");
  if (n > 4) throw SizeLimit("quadrature supports at most four loop points");
  for (const Edge& e : g.internal_edges)
    if (e.a < 1 || e.b <= e.a || e.b > n) throw InvalidEdge("chord endpoint out of range");

  // combinatorial matching sign relating the kernel product to the wedge
  std::vector<TwoFormMatrix> ind(nc);
  for (int k = 0; k < nc; ++k) {
    ind[k].reset(n);
    ind[k].accumulate(g.internal_edges[k].a - 1, g.internal_edges[k].b - 1, 1.0);
    ind[k].note_support(g.internal_edges[k].a - 1);
    ind[k].note_support(g.internal_edges[k].b - 1);
  }
  double sigma = wedge_top_evaluate(ind);
  if (sigma == 0.0) throw NotChordDiagram("chords do not form a perfect matching");

  int N = std::max(mesh, 8);
  if (N % 2) ++N;
  double q_half = chord_quad_pass(c, g, N / 2, sigma);
  double q_full = chord_quad_pass(c, g, N, sigma);

  Estimate e;
  // the corner cells of the ordered region contribute a clean first-order
  // error, so one Richardson step removes it; the reported error keeps the
  // unextrapolated difference as a conservative bound
  e.value = 2.0 * q_full - q_half;
  e.std_error = std::abs(q_full - q_half);
  double tuples = 1.0;
  for (int k = 0; k < n; ++k) tuples = tuples * (N - k) / (k + 1);
  e.n_samples = static_cast<uint64_t>(tuples * n);
  e.seed = 0;
  e.rejection_rate = 0.0;
  return e;
}

// ---------------------------------------------------------------------------
// collapsing-vertex fiber integral

namespace {

inline double pair4(const TwoFormMatrix& A, const TwoFormMatrix& B, int a, int b, int c, int d) {
  return A.at(a, b) * B.at(c, d) - A.at(a, c) * B.at(b, d) + A.at(a, d) * B.at(b, c) +
         A.at(b, c) * B.at(a, d) - A.at(b, d) * B.at(a, c) + A.at(c, d) * B.at(a, b);
}

// edge form between two of three free points; slots 3p..3p+2 per point
void point_pair_form(TwoFormMatrix& out, const Point3* pts, int from, int to) {
  Vec3 d = pts[to] - pts[from];
  double r2 = norm2(d);
  if (r2 == 0.0) throw CoincidentPoints("edge form at coincident points");
  double r = std::sqrt(r2);
  Vec3 u{d.x / r, d.y / r, d.z / r};
  double scale = 1.0 / (4.0 * kPi * r2);
  int coords[6];
  Vec3 dirs[6];
  for (int c = 0; c < 3; ++c) {
    coords[c] = 3 * from + c;
    dirs[c] = {c == 0 ? -1.0 : 0.0, c == 1 ? -1.0 : 0.0, c == 2 ? -1.0 : 0.0};
    coords[3 + c] = 3 * to + c;
    dirs[3 + c] = {c == 0 ? 1.0 : 0.0, c == 1 ? 1.0 : 0.0, c == 2 ? 1.0 : 0.0};
  }
  for (int i = 0; i < 6; ++i) out.note_support(coords[i]);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) {
      double v = det3(u, dirs[i], dirs[j]) * scale;
      if (v != 0.0) out.accumulate(coords[i], coords[j], v);
    }
}

}  // namespace

std::vector<ResidualComponent> kontsevich_residual(const Point3& xj, const Point3& xk,
                                                   uint64_t n_samples, uint64_t seed, int workers,
                                                   double rejection_cutoff) {
  double lam = 0.5 * norm(xj - xk);
  if (!(lam > 0)) throw CoincidentPoints("base points coincide");
  SampleKernel kernel = [&xj, &xk, lam, rejection_cutoff](uint64_t, Rng& rng,
                                                          double* vals) -> int {
    int rejects = 0;
    for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
      const Point3& anchor = rng.uniform() < 0.5 ? xj : xk;
      double r = lam * std::tan(0.5 * kPi * rng.uniform());
      Point3 y = anchor + r * random_unit(rng);
      double rj = norm(y - xj), rk = norm(y - xk);
      if (rj < rejection_cutoff || rk < rejection_cutoff) {
        ++rejects;
        continue;
      }
      double q = 0.5 * (point_density3(rj, lam) + point_density3(rk, lam));
      Point3 pts[3] = {y, xj, xk};
      TwoFormMatrix A, B;
      A.reset(9);
      B.reset(9);
      point_pair_form(A, pts, 0, 1);
      point_pair_form(B, pts, 0, 2);
      // wedge paired with one base direction and the full fiber frame
      for (int v = 0; v < 6; ++v) vals[v] = pair4(A, B, 3 + v, 0, 1, 2) / q;
      return rejects;
    }
    for (int v = 0; v < 6; ++v) vals[v] = 0.0;
    return rejects;
  };
  MultiEstimate m = run_blocked_mc(n_samples, seed, workers, 6, kernel);
  static const char* kNames[6] = {"dxj_x", "dxj_y", "dxj_z", "dxk_x", "dxk_y", "dxk_z"};
  std::vector<ResidualComponent> out;
  for (int v = 0; v < 6; ++v) out.push_back({kNames[v], m.value[v], m.std_error[v]});
  return out;
}

// ---------------------------------------------------------------------------
// vacuum integral on the normalized configuration slice

namespace {

constexpr int kMaxSlicePoints = 8;

struct SliceGeometry {
  int n = 0;        // graph vertices (points 1..n; 0 = base, m-1 = far point)
  int m = 0;        // total points
  int amb = 0;      // ambient dimension of the centroid-free coordinates
  int ds = 0;       // slice sphere dimension
  int n_edges = 0;
  double area = 0.0;
  double beta = 0.5;      // collision-mixture share
  double rho_exp = 0.0;   // exponent of the radial marginal
  double rho_norm = 0.0;  // its normalization
  std::vector<double> helmert;                // (m-1) x m orthonormal rows
  std::vector<std::pair<int, int>> pairs;     // all point pairs
  std::vector<std::vector<double>> pair_u;    // per pair: profile over rows
  std::vector<Edge> edges;                    // sorted graph edges
};

SliceGeometry make_slice_geometry(const LabeledGraph& g) {
  ValidationReport rep = validate_graph(g);
  if (!rep.vertex_range_ok || rep.has_self_loop || !rep.trivalent)
    throw NotTrivalent("vacuum integral needs a trivalent multigraph: " + rep.note);
  SliceGeometry geo;
  geo.n = g.n_vertices;
  geo.m = geo.n + 2;
  geo.amb = 3 * (geo.m - 1);
  geo.ds = geo.amb - 1;
  if (geo.ds > kMaxFormDim)
    throw SizeLimit("slice dimension " + std::to_string(geo.ds) + " exceeds the wedge limit");
  geo.n_edges = static_cast<int>(g.edges.size());
  if (2 * (geo.n_edges + 1) != geo.ds)
    throw DegreeMismatch("edge forms do not give a top form on the slice");
  double half = 0.5 * (geo.ds + 1);
  geo.area = 2.0 * std::exp(half * std::log(kPi) - std::lgamma(half));

  geo.helmert.assign(static_cast<size_t>(geo.m - 1) * geo.m, 0.0);
  for (int r = 0; r < geo.m - 1; ++r) {
    double k = r + 1.0;
    double inv = 1.0 / std::sqrt(k * (k + 1.0));
    for (int p = 0; p <= r; ++p) geo.helmert[static_cast<size_t>(r) * geo.m + p] = inv;
    geo.helmert[static_cast<size_t>(r) * geo.m + r + 1] = -k * inv;
  }

  for (int p = 0; p < geo.m; ++p)
    for (int q = p + 1; q < geo.m; ++q) {
      geo.pairs.push_back({p, q});
      std::vector<double> u(geo.m - 1);
      for (int r = 0; r < geo.m - 1; ++r)
        u[r] = (geo.helmert[static_cast<size_t>(r) * geo.m + p] -
                geo.helmert[static_cast<size_t>(r) * geo.m + q]) /
               std::sqrt(2.0);
      geo.pair_u.push_back(std::move(u));
    }

  geo.rho_exp = 0.5 * (geo.amb - 5);
  // normalization of rho^2 (1-rho^2)^a on [0,1]
  geo.rho_norm = std::exp(std::lgamma(1.5) + std::lgamma(geo.rho_exp + 1.0) -
                          std::lgamma(geo.rho_exp + 2.5)) /
                 2.0;

  geo.edges = g.edges;
  std::sort(geo.edges.begin(), geo.edges.end());
  return geo;
}

void slice_points(const SliceGeometry& geo, const double* x, Point3* pts) {
  for (int p = 0; p < geo.m; ++p) {
    Point3 v{0, 0, 0};
    for (int r = 0; r < geo.m - 1; ++r) {
      double h = geo.helmert[static_cast<size_t>(r) * geo.m + p];
      v.x += x[3 * r + 0] * h;
      v.y += x[3 * r + 1] * h;
      v.z += x[3 * r + 2] * h;
    }
    pts[p] = v;
  }
}

// Orthonormal tangent frame of the slice sphere at x (reflector through
// x + sign(x_0) e_0); frame vectors embedded as per-point 3-vectors.
void slice_frame(const SliceGeometry& geo, const double* x, Vec3 A[][kMaxSlicePoints],
                 int& sigma_out) {
  double w[24];
  std::copy(x, x + geo.amb, w);
  double sigma = x[0] >= 0.0 ? 1.0 : -1.0;
  w[0] += sigma;
  double wn2 = 0.0;
  for (int t = 0; t < geo.amb; ++t) wn2 += w[t] * w[t];

  Point3 wh[kMaxSlicePoints];
  slice_points(geo, w, wh);  // same linear embedding applied to w

  for (int j = 1; j < geo.amb; ++j) {
    int alpha = j - 1;
    double coef = 2.0 * w[j] / wn2;
    int rj = j / 3, cj = j % 3;
    for (int p = 0; p < geo.m; ++p) {
      double base = geo.helmert[static_cast<size_t>(rj) * geo.m + p];
      Vec3 v{-coef * wh[p].x, -coef * wh[p].y, -coef * wh[p].z};
      if (cj == 0)
        v.x += base;
      else if (cj == 1)
        v.y += base;
      else
        v.z += base;
      A[alpha][p] = v;
    }
  }
  sigma_out = static_cast<int>(sigma);
}

// wedge of the cyclic edge forms (through the base point) and the
// base-to-far-point form, on the given frame
double slice_form_value(const SliceGeometry& geo, const Point3* pts,
                        const Vec3 A[][kMaxSlicePoints]) {
  thread_local std::vector<TwoFormMatrix> mats;
  thread_local std::vector<const TwoFormMatrix*> ptrs;
  if (static_cast<int>(mats.size()) < geo.n_edges + 1) mats.resize(geo.n_edges + 1);
  ptrs.clear();

  Vec3 dv[kMaxFormDim];
  auto add_pair = [&](TwoFormMatrix& mm, int p, int q) {
    Vec3 d = pts[q] - pts[p];
    double r2 = norm2(d);
    if (r2 == 0.0) throw CoincidentPoints("slice points coincide");
    double r = std::sqrt(r2);
    Vec3 u{d.x / r, d.y / r, d.z / r};
    double scale = 1.0 / (4.0 * kPi * r2);
    for (int a = 0; a < geo.ds; ++a) dv[a] = A[a][q] - A[a][p];
    for (int a = 0; a < geo.ds; ++a)
      for (int b = a + 1; b < geo.ds; ++b) {
        double v = det3(u, dv[a], dv[b]) * scale;
        if (v != 0.0) mm.accumulate(a, b, v);
      }
  };

  int n_mats = 0;
  size_t i = 0;
  while (i < geo.edges.size()) {
    size_t j = i;
    while (j < geo.edges.size() && geo.edges[j] == geo.edges[i]) ++j;
    TwoFormMatrix& mm = mats[n_mats++];
    mm.reset(geo.ds);
    add_pair(mm, geo.edges[i].a, geo.edges[i].b);
    add_pair(mm, geo.edges[i].b, 0);
    add_pair(mm, 0, geo.edges[i].a);
    for (size_t t = i; t < j; ++t) ptrs.push_back(&mm);
    i = j;
  }
  TwoFormMatrix& far = mats[n_mats++];
  far.reset(geo.ds);
  add_pair(far, 0, geo.m - 1);
  ptrs.push_back(&far);
  return wedge_top_evaluate(ptrs);
}

// Mixture draw on the slice sphere: uniform, or concentrated near one
// pairwise-collision subspace with an exactly known density.
bool draw_slice_sample(const SliceGeometry& geo, Rng& rng, double cutoff, double* x, double& q,
                       Point3* pts, int& rejects) {
  int n_pairs = static_cast<int>(geo.pairs.size());
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    double g[24];
    for (int t = 0; t < geo.amb; ++t) g[t] = rng.normal();
    double branch = rng.uniform();
    if (branch < 1.0 - geo.beta) {
      double nn = 0.0;
      for (int t = 0; t < geo.amb; ++t) nn += g[t] * g[t];
      nn = std::sqrt(nn);
      if (nn < 1e-12) {
        ++rejects;
        continue;
      }
      for (int t = 0; t < geo.amb; ++t) x[t] = g[t] / nn;
    } else {
      int pi = pick_index(rng, n_pairs);
      const std::vector<double>& u = geo.pair_u[pi];
      double alpha[3] = {0, 0, 0};
      for (int r = 0; r < geo.m - 1; ++r)
        for (int c = 0; c < 3; ++c) alpha[c] += g[3 * r + c] * u[r];
      double gp[24];
      double nz = 0.0;
      for (int r = 0; r < geo.m - 1; ++r)
        for (int c = 0; c < 3; ++c) {
          double v = g[3 * r + c] - alpha[c] * u[r];
          gp[3 * r + c] = v;
          nz += v * v;
        }
      nz = std::sqrt(nz);
      double na = std::sqrt(alpha[0] * alpha[0] + alpha[1] * alpha[1] + alpha[2] * alpha[2]);
      if (nz < 1e-12 || na < 1e-12) {
        ++rejects;
        continue;
      }
      double rho = rng.uniform();
      double s1 = std::sqrt(std::max(0.0, 1.0 - rho * rho));
      for (int r = 0; r < geo.m - 1; ++r)
        for (int c = 0; c < 3; ++c)
          x[3 * r + c] = s1 * gp[3 * r + c] / nz + rho * (alpha[c] / na) * u[r];
    }
    slice_points(geo, x, pts);
    bool clash = false;
    for (int p = 0; p < geo.m && !clash; ++p)
      for (int s = p + 1; s < geo.m; ++s)
        if (norm(pts[p] - pts[s]) < cutoff) {
          clash = true;
          break;
        }
    if (clash) {
      ++rejects;
      continue;
    }
    // exact mixture density relative to the uniform sphere law
    q = 1.0 - geo.beta;
    for (int pi = 0; pi < n_pairs; ++pi) {
      const std::vector<double>& u = geo.pair_u[pi];
      double rho2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        double a = 0.0;
        for (int r = 0; r < geo.m - 1; ++r) a += x[3 * r + c] * u[r];
        rho2 += a * a;
      }
      double rho = std::sqrt(std::min(rho2, 1.0 - 1e-15));
      double marginal =
          rho * rho * std::pow(std::max(1e-300, 1.0 - rho * rho), geo.rho_exp) / geo.rho_norm;
      q += geo.beta / n_pairs / std::max(marginal, 1e-300);
    }
    return true;
  }
  return false;
}

}  // namespace

Estimate b_gamma_estimate(const LabeledGraph& g, uint64_t n_samples, uint64_t seed, int workers,
                          double rejection_cutoff) {
  SliceGeometry geo = make_slice_geometry(g);
  SampleKernel kernel = [&geo, rejection_cutoff](uint64_t, Rng& rng, double* vals) -> int {
    int rejects = 0;
    double x[24];
    double q = 1.0;
    Point3 pts[kMaxSlicePoints];
    if (!draw_slice_sample(geo, rng, rejection_cutoff, x, q, pts, rejects)) {
      vals[0] = 0.0;
      return rejects;
    }
    Vec3 A[kMaxFormDim][kMaxSlicePoints];
    int sigma = 1;
    slice_frame(geo, x, A, sigma);
    double f = slice_form_value(geo, pts, A);
    vals[0] = sigma * f * geo.area / q;
    return rejects;
  };
  MultiEstimate m = run_blocked_mc(n_samples, seed, workers, 1, kernel);
  return {m.value[0], m.std_error[0], n_samples, seed, m.rejection_rate};
}

ParityCheckResult b_gamma_parity_check(const LabeledGraph& g, int n_configs, uint64_t seed) {
  SliceGeometry geo = make_slice_geometry(g);
  ParityCheckResult out;
  double expected = ((geo.n_edges + 1) % 2 == 0) ? 1.0 : -1.0;
  for (int i = 0; i < n_configs; ++i) {
    Rng rng = sample_stream(seed, static_cast<uint64_t>(i));
    double x[24];
    double nn = 0.0;
    for (int t = 0; t < geo.amb; ++t) {
      x[t] = rng.normal();
      nn += x[t] * x[t];
    }
    nn = std::sqrt(nn);
    if (nn < 1e-12) continue;
    for (int t = 0; t < geo.amb; ++t) x[t] /= nn;

    Point3 pts[kMaxSlicePoints], neg[kMaxSlicePoints];
    slice_points(geo, x, pts);
    for (int p = 0; p < geo.m; ++p) neg[p] = {-pts[p].x, -pts[p].y, -pts[p].z};
    Vec3 A[kMaxFormDim][kMaxSlicePoints];
    int sigma = 1;
    slice_frame(geo, x, A, sigma);
    double f_plus = slice_form_value(geo, pts, A);
    double f_minus = slice_form_value(geo, neg, A);
    if (std::abs(f_plus) < 1e-300) continue;
    double dev = std::abs(f_minus / f_plus - expected);
    ++out.n_checked;
    if (dev > 1e-9) ++out.n_failed;
    out.max_deviation = std::max(out.max_deviation, dev);
  }
  return out;
}

std::vector<ConvergenceRow> convergence_table(const std::function<Estimate(uint64_t)>& runner,
                                              uint64_t n_samples) {
  std::vector<uint64_t> sizes;
  for (uint64_t d : {uint64_t{64}, uint64_t{16}, uint64_t{4}, uint64_t{1}}) {
    uint64_t k = std::max<uint64_t>(1, n_samples / d);
    if (sizes.empty() || k > sizes.back()) sizes.push_back(k);
  }
  std::vector<ConvergenceRow> rows;
  for (uint64_t k : sizes) {
    auto t0 = std::chrono::steady_clock::now();
    Estimate e = runner(k);
    auto t1 = std::chrono::steady_clock::now();
    ConvergenceRow row;
    row.n_samples = k;
    row.value = e.value;
    row.std_error = e.std_error;
    row.rejection_rate = e.rejection_rate;
    row.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace knotint
