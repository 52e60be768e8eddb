#include "varimove/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "varimove/errors.hpp"

namespace varimove {

PushForwardResult push_forward_fluid_mesh(const FluidMesh& mesh, std::span<const Vec2> v, double tau,
                                          double jacobian_floor) {
  PushForwardResult out;
  out.mesh = mesh;
  out.displacement.resize(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    out.displacement[i] = tau * v[i];
    out.mesh.nodes[i] = mesh.nodes[i] + out.displacement[i];
  }
  out.det_factors.resize(mesh.triangles.size());
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& t = mesh.triangles[e];
    const double a0 = signed_area(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
    const auto& p = out.mesh.nodes;
    const double a1 = signed_area(p[t[0]], p[t[1]], p[t[2]]);
    out.det_factors[e] = a1 / a0;
    if (out.det_factors[e] <= jacobian_floor)
      throw Error(ErrorKind::NonPositiveJacobian,
                  fmt::format("triangle {} has det(I + tau grad v) = {:.6g}", e, out.det_factors[e]));
  }
  return out;
}

FlowMapLedger::FlowMapLedger(const FluidMesh& origin, double c_lo, double c_hi)
    : tris_(origin.triangles),
      origin_(origin.nodes),
      front_(origin.nodes),
      running_det_(origin.triangles.size(), 1.0),
      c_lo_(c_lo),
      c_hi_(c_hi) {}

void FlowMapLedger::compose(const PushForwardResult& step) {
  for (std::size_t i = 0; i < front_.size(); ++i) front_[i] += step.displacement[i];
  for (std::size_t e = 0; e < running_det_.size(); ++e) {
    running_det_[e] *= step.det_factors[e];
    if (running_det_[e] < c_lo_ || running_det_[e] > c_hi_)
      throw Error(ErrorKind::DeterminantBoundViolation,
                  fmt::format("det grad Phi = {:.6g} on triangle {} outside [{}, {}]", running_det_[e], e, c_lo_, c_hi_));
  }
  ++step_;
}

void FlowMapLedger::anchor() {
  origin_ = front_;
  std::fill(running_det_.begin(), running_det_.end(), 1.0);
  step_ = 0;
}

std::vector<double> FlowMapLedger::direct_det() const {
  std::vector<double> d(tris_.size());
  for (std::size_t e = 0; e < tris_.size(); ++e) {
    const auto& t = tris_[e];
    d[e] = signed_area(front_[t[0]], front_[t[1]], front_[t[2]]) /
           signed_area(origin_[t[0]], origin_[t[1]], origin_[t[2]]);
  }
  return d;
}

void FlowMapLedger::restore(std::vector<Vec2> origin, std::vector<Vec2> front, std::vector<double> running,
                            int step) {
  origin_ = std::move(origin);
  front_ = std::move(front);
  running_det_ = std::move(running);
  step_ = step;
}

double min_det(const ReferenceSolidMesh& solid, std::span<const Vec2> eta) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& t : solid.elements) {
    const double ref = signed_area(solid.nodes[t[0]], solid.nodes[t[1]], solid.nodes[t[2]]);
    m = std::min(m, signed_area(eta[t[0]], eta[t[1]], eta[t[2]]) / ref);
  }
  return m;
}

// Union area by a vertical slab sweep. Slab boundaries are all vertex abscissae
// and all edge crossings, so inside a slab no two edges cross and the length of
// the union along a vertical line is affine in x. The midpoint rule is then exact.
double image_area(const ReferenceSolidMesh& solid, std::span<const Vec2> eta) {
  struct Seg {
    Vec2 a, b;
  };
  std::vector<Seg> segs;
  std::vector<double> xs;
  segs.reserve(3 * solid.elements.size());
  for (const auto& t : solid.elements)
    for (int k = 0; k < 3; ++k) {
      segs.push_back({eta[t[k]], eta[t[(k + 1) % 3]]});
      xs.push_back(eta[t[k]].x());
    }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Vec2 r = segs[i].b - segs[i].a;
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const Vec2 s = segs[j].b - segs[j].a;
      const double den = cross(r, s);
      if (den == 0.0) continue;
      const Vec2 qp = segs[j].a - segs[i].a;
      const double t = cross(qp, s) / den, u = cross(qp, r) / den;
      if (t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0) xs.push_back(segs[i].a.x() + t * r.x());
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  long double area = 0.0L;
  std::vector<std::pair<double, double>> spans;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double x = 0.5 * (xs[i] + xs[i + 1]);
    spans.clear();
    for (const auto& t : solid.elements) {
      double ys[2];
      int n = 0;
      for (int k = 0; k < 3 && n < 2; ++k) {
        const Vec2 &a = eta[t[k]], &b = eta[t[(k + 1) % 3]];
        if ((a.x() - x) * (b.x() - x) < 0.0) ys[n++] = a.y() + (x - a.x()) / (b.x() - a.x()) * (b.y() - a.y());
      }
      if (n == 2) spans.emplace_back(std::min(ys[0], ys[1]), std::max(ys[0], ys[1]));
    }
    std::sort(spans.begin(), spans.end());
    double len = 0.0, lo = 0.0, hi = -std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : spans) {
      if (a > hi) {
        if (std::isfinite(hi)) len += hi - lo;
        lo = a;
        hi = b;
      } else {
        hi = std::max(hi, b);
      }
    }
    if (std::isfinite(hi)) len += hi - lo;
    area += static_cast<long double>(xs[i + 1] - xs[i]) * len;
  }
  return static_cast<double>(area);
}

double ciarlet_necas_defect(const ReferenceSolidMesh& solid, std::span<const Vec2> eta) {
  double integral = 0.0;
  for (const auto& t : solid.elements) integral += signed_area(eta[t[0]], eta[t[1]], eta[t[2]]);
  return std::abs(image_area(solid, eta) - integral);
}

namespace {

int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
         p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  const int o1 = orient(a0, a1, b0), o2 = orient(a0, a1, b1);
  const int o3 = orient(b0, b1, a0), o4 = orient(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * d)).norm();
}

}  // namespace

double segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

bool boundary_image_is_simple(const ReferenceSolidMesh& solid, std::span<const Vec2> eta) {
  const auto& be = solid.boundary;
  for (std::size_t i = 0; i < be.size(); ++i) {
    for (std::size_t j = i + 1; j < be.size(); ++j) {
      const int shared = (be[i].a == be[j].a) + (be[i].a == be[j].b) + (be[i].b == be[j].a) + (be[i].b == be[j].b);
      const Vec2 &a0 = eta[be[i].a], &a1 = eta[be[i].b], &b0 = eta[be[j].a], &b1 = eta[be[j].b];
      if (shared == 0) {
        if (segments_intersect(a0, a1, b0, b1)) return false;
        continue;
      }
      // neighbours: they may only meet at the shared node, so reject a fold back
      // onto each other (the non-shared endpoints lying on the other segment)
      const int s_i = (be[i].a == be[j].a || be[i].a == be[j].b) ? be[i].b : be[i].a;
      const int s_j = (be[j].a == be[i].a || be[j].a == be[i].b) ? be[j].b : be[j].a;
      if ((orient(a0, a1, eta[s_j]) == 0 && on_segment(a0, a1, eta[s_j])) ||
          (orient(b0, b1, eta[s_i]) == 0 && on_segment(b0, b1, eta[s_i])))
        return false;
    }
  }
  return true;
}

double collision_distance(const ReferenceSolidMesh& solid, std::span<const Vec2> eta, const Container& container,
                          double self_contact_gap) {
  std::vector<BoundaryEdge> m_edges, p_edges;
  for (const auto& be : solid.boundary)
    (be.tag == BoundaryTag::M ? m_edges : p_edges).push_back(be);
  double d = std::numeric_limits<double>::infinity();
  const auto& poly = container.polygon;
  for (const auto& e : m_edges) {
    // M edges close to the clamped part touch or nearly touch the wall by construction.
    bool near_p = false;
    for (const auto& p : p_edges)
      near_p = near_p || segment_distance(solid.nodes[e.a], solid.nodes[e.b], solid.nodes[p.a], solid.nodes[p.b]) <
                             self_contact_gap;
    if (near_p) continue;
    for (std::size_t k = 0; k < poly.size(); ++k)
      d = std::min(d, segment_distance(eta[e.a], eta[e.b], poly[k], poly[(k + 1) % poly.size()]));
  }
  for (std::size_t i = 0; i < m_edges.size(); ++i) {
    for (std::size_t j = i + 1; j < m_edges.size(); ++j) {
      const auto &ei = m_edges[i], &ej = m_edges[j];
      const double ref = segment_distance(solid.nodes[ei.a], solid.nodes[ei.b], solid.nodes[ej.a], solid.nodes[ej.b]);
      if (ref < self_contact_gap) continue;
      d = std::min(d, segment_distance(eta[ei.a], eta[ei.b], eta[ej.a], eta[ej.b]));
    }
  }
  return d;
}

}  // namespace varimove
