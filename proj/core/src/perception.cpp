#include "dlo/perception.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include "dlo/error.hpp"

namespace dlo {

namespace {

// Clockwise ring starting north: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kRingDu{0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kRingDv{-1, -1, 0, 1, 1, 1, 0, -1};

int neighbour_count(const BinaryImage& img, int u, int v) {
  int n = 0;
  for (int k = 0; k < 8; ++k) n += img.get(u + kRingDu[k], v + kRingDv[k]);
  return n;
}

std::vector<Pixel> find_endpoints(const BinaryImage& img) {
  std::vector<Pixel> ends;
  for (int u = 0; u < img.width(); ++u) {
    for (int v = 0; v < img.height(); ++v) {
      if (img.get(u, v) && neighbour_count(img, u, v) == 1) ends.push_back({u, v});
    }
  }
  return ends;
}

Skeleton make_skeleton(const BinaryImage& img) {
  Skeleton s;
  s.dims = img.dims();
  s.pixels = img.positive_pixels();
  s.endpoints = find_endpoints(img);
  return s;
}

bool zhang_suen_pass(BinaryImage& img, bool first) {
  std::vector<Pixel> remove;
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      if (!img.get(u, v)) continue;
      std::array<int, 8> p{};
      for (int k = 0; k < 8; ++k) p[k] = img.get(u + kRingDu[k], v + kRingDv[k]);
      const int b = p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7];
      if (b < 2 || b > 6) continue;
      int a = 0;
      for (int k = 0; k < 8; ++k) a += (p[k] == 0 && p[(k + 1) % 8] == 1);
      if (a != 1) continue;
      // p[0]=N(P2) p[2]=E(P4) p[4]=S(P6) p[6]=W(P8)
      if (first) {
        if (p[0] * p[2] * p[4] != 0 || p[2] * p[4] * p[6] != 0) continue;
      } else {
        if (p[0] * p[2] * p[6] != 0 || p[0] * p[4] * p[6] != 0) continue;
      }
      remove.push_back({u, v});
    }
  }
  for (const auto& px : remove) img.set(px.u, px.v, false);
  return !remove.empty();
}

// Number of 8-connected groups formed by the set ring neighbours of a pixel.
int ring_components(const std::array<int, 8>& p) {
  std::array<int, 8> parent{0, 1, 2, 3, 4, 5, 6, 7};
  auto find = [&parent](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto join = [&](int a, int b) {
    if (p[a] && p[b]) parent[find(a)] = find(b);
  };
  for (int k = 0; k < 8; ++k) {
    join(k, (k + 1) % 8);
    if (k % 2 == 0) join(k, (k + 2) % 8);  // edge neighbours touch diagonally
  }
  int groups = 0;
  for (int k = 0; k < 8; ++k) groups += (p[k] && find(k) == k);
  return groups;
}

void remove_staircase(BinaryImage& img) {
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      if (!img.get(u, v)) continue;
      std::array<int, 8> p{};
      int b = 0;
      for (int k = 0; k < 8; ++k) b += p[k] = img.get(u + kRingDu[k], v + kRingDv[k]);
      if (b < 2) continue;
      // A corner pixel between two 4-neighbours that already touch diagonally.
      bool corner = false;
      for (int k = 0; k < 8; k += 2) corner = corner || (p[k] && p[(k + 2) % 8] && !p[(k + 1) % 8]);
      if (corner && ring_components(p) == 1) img.set(u, v, false);
    }
  }
}

}  // namespace

BinaryImage Skeleton::to_image() const {
  BinaryImage img(dims);
  for (const auto& p : pixels) img.set(p.u, p.v);
  return img;
}

Skeleton skeletonize(const BinaryImage& image) {
  if (image.empty()) throw EmptyInputError("cannot skeletonize an empty image");
  BinaryImage img = image;
  while (true) {
    const bool a = zhang_suen_pass(img, true);
    const bool b = zhang_suen_pass(img, false);
    if (!a && !b) break;
  }
  remove_staircase(img);
  return make_skeleton(img);
}

Skeleton prune_spurs(const Skeleton& skeleton, int min_length) {
  BinaryImage img = skeleton.to_image();
  std::vector<Pixel> doomed;
  for (const auto& end : skeleton.endpoints) {
    std::vector<Pixel> path{end};
    Pixel cur = end;
    bool hit_junction = false;
    while (static_cast<int>(path.size()) <= min_length) {
      Pixel next{-1, -1};
      int options = 0;
      for (int k = 0; k < 8; ++k) {
        const Pixel q{cur.u + kRingDu[k], cur.v + kRingDv[k]};
        if (!img.get(q.u, q.v)) continue;
        if (std::find(path.begin(), path.end(), q) != path.end()) continue;
        ++options;
        next = q;
      }
      if (options == 0) break;  // isolated short piece, not a spur
      if (options > 1 || neighbour_count(img, next.u, next.v) >= 3) {
        hit_junction = true;
        break;
      }
      cur = next;
      path.push_back(cur);
    }
    if (hit_junction && static_cast<int>(path.size()) < min_length) {
      doomed.insert(doomed.end(), path.begin(), path.end());
    }
  }
  for (const auto& p : doomed) img.set(p.u, p.v, false);
  return make_skeleton(img);
}

std::vector<Pixel> order_skeleton(const Skeleton& skeleton) {
  const auto& ends = skeleton.endpoints;
  const int n_ends = static_cast<int>(ends.size());
  if (n_ends == 0 || n_ends > 2) throw AmbiguityError(n_ends);

  const Pixel start = ends.front();  // smallest u, ties smallest v
  const bool reserve_end = n_ends == 2;
  const Pixel finish = reserve_end ? ends.back() : Pixel{-1, -1};

  BinaryImage unvisited = skeleton.to_image();
  unvisited.set(start.u, start.v, false);
  if (reserve_end) unvisited.set(finish.u, finish.v, false);
  std::size_t remaining = skeleton.pixels.size() - (reserve_end ? 2 : 1);

  std::vector<Pixel> order{start};
  order.reserve(skeleton.pixels.size());
  // 4-neighbours before diagonals, so the walk prefers the closest pixel.
  constexpr std::array<int, 8> kOrder{0, 2, 4, 6, 1, 3, 5, 7};
  Pixel cur = start;
  while (remaining > 0) {
    Pixel next{-1, -1};
    for (int k : kOrder) {
      const Pixel q{cur.u + kRingDu[k], cur.v + kRingDv[k]};
      if (unvisited.get(q.u, q.v)) {
        next = q;
        break;
      }
    }
    if (next.u < 0) {
      long best = std::numeric_limits<long>::max();
      for (const auto& q : skeleton.pixels) {
        if (!unvisited.get(q.u, q.v)) continue;
        const long du = q.u - cur.u;
        const long dv = q.v - cur.v;
        const long d = du * du + dv * dv;
        if (d < best) {
          best = d;
          next = q;
        }
      }
    }
    unvisited.set(next.u, next.v, false);
    order.push_back(next);
    cur = next;
    --remaining;
  }
  if (reserve_end) order.push_back(finish);
  return order;
}

KeypointSequence detect_keypoints_geometric(const BinaryImage& image, int m) {
  if (m < 2) throw ParameterError("need at least two keypoints");
  const Skeleton skel = prune_spurs(skeletonize(image));
  if (skel.endpoints.empty() || skel.endpoints.size() > 2) {
    throw AmbiguityError(static_cast<int>(skel.endpoints.size()));
  }
  if (skel.pixels.size() < static_cast<std::size_t>(m)) {
    throw ParameterError("skeleton has fewer pixels than requested keypoints");
  }
  const auto order = order_skeleton(skel);
  std::vector<Vec2> pts;
  pts.reserve(order.size());
  for (const auto& p : order) pts.emplace_back(p.u + 0.5, p.v + 0.5);

  std::vector<double> s(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
  const auto count = static_cast<std::size_t>(m);
  std::vector<std::size_t> idx(count);
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = s.back() * static_cast<double>(k) / static_cast<double>(count - 1);
    while (cursor + 1 < pts.size() &&
           std::abs(s[cursor + 1] - target) <= std::abs(s[cursor] - target)) {
      ++cursor;
    }
    idx[k] = cursor;
  }
  idx.front() = 0;
  for (std::size_t k = 1; k < count; ++k) idx[k] = std::max(idx[k], idx[k - 1] + 1);
  idx.back() = pts.size() - 1;
  for (std::size_t k = count - 1; k-- > 0;) idx[k] = std::min(idx[k], idx[k + 1] - 1);

  KeypointSequence out{{}, Frame::image};
  for (std::size_t i : idx) out.points.push_back(pts[i]);
  return out;
}

BinaryImage morphological_close(const BinaryImage& image) {
  BinaryImage dilated(image.dims());
  for (int v = 0; v < image.height(); ++v) {
    for (int u = 0; u < image.width(); ++u) {
      bool any = image.get(u, v);
      for (int k = 0; k < 8 && !any; ++k) any = image.get(u + kRingDu[k], v + kRingDv[k]);
      if (any) dilated.set(u, v);
    }
  }
  BinaryImage closed(image.dims());
  for (int v = 0; v < image.height(); ++v) {
    for (int u = 0; u < image.width(); ++u) {
      if (!dilated.get(u, v)) continue;
      bool all = true;
      for (int k = 0; k < 8 && all; ++k) {
        const int uu = u + kRingDu[k];
        const int vv = v + kRingDv[k];
        all = !dilated.in_bounds(uu, vv) || dilated.get(uu, vv);
      }
      if (all) closed.set(u, v);
    }
  }
  return closed;
}

KeypointSequence detect_with_cleanup(const BinaryImage& image, int m) {
  try {
    return detect_keypoints_geometric(image, m);
  } catch (const AmbiguityError&) {
    return detect_keypoints_geometric(morphological_close(image), m);
  }
}

Vec2 nearest_positive_pixel(const BinaryImage& image, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  Vec2 out = p;
  for (int v = 0; v < image.height(); ++v) {
    for (int u = 0; u < image.width(); ++u) {
      if (!image.get(u, v)) continue;
      const Vec2 c(u + 0.5, v + 0.5);
      const double d = (c - p).squaredNorm();
      if (d < best) {
        best = d;
        out = c;
      }
    }
  }
  if (!std::isfinite(best)) throw EmptyInputError("image has no positive pixel");
  return out;
}

KeypointSequence finetune_keypoints(const KeypointSequence& raw, const BinaryImage& image) {
  if (image.empty()) throw EmptyInputError("cannot finetune against an empty image");
  const std::size_t m = raw.size();
  KeypointSequence out = raw;
  const double max_radius = std::hypot(image.width(), image.height());
  for (std::size_t j = 0; j < m; ++j) {
    const Vec2 p = raw[j];
    if (image.at(p)) continue;
    if (j == 0 || j + 1 == m) {
      out.points[j] = nearest_positive_pixel(image, p);
      continue;
    }
    const Vec2 tangent = raw[j + 1] - raw[j - 1];
    if (tangent.norm() == 0.0) {
      out.points[j] = nearest_positive_pixel(image, p);
      continue;
    }
    const Vec2 normal = perp(tangent.normalized());
    std::optional<Vec2> hit;
    for (double t = 0.5; t <= max_radius && !hit; t += 0.5) {
      const Vec2 a = p + t * normal;
      const Vec2 b = p - t * normal;
      const bool ha = image.at(a);
      const bool hb = image.at(b);
      if (ha && hb) {
        hit = a.y() <= b.y() ? a : b;
      } else if (ha) {
        hit = a;
      } else if (hb) {
        hit = b;
      }
    }
    out.points[j] = hit ? *hit : nearest_positive_pixel(image, p);
  }
  return out;
}

double corner_error(const KeypointSequence& pred, const KeypointSequence& truth) {
  if (pred.size() != truth.size() || pred.size() < 2) {
    throw ParameterError("keypoint sequences differ in length");
  }
  return 0.5 * ((pred.points.front() - truth.points.front()).norm() +
                (pred.points.back() - truth.points.back()).norm());
}

double keypoint_error(const KeypointSequence& pred, const KeypointSequence& truth) {
  if (pred.size() != truth.size() || pred.size() == 0) {
    throw ParameterError("keypoint sequences differ in length");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) sum += (pred[j] - truth[j]).norm();
  return sum / static_cast<double>(pred.size());
}

BinaryImage reconstruct_from_keypoints(const KeypointSequence& kps, double half_thickness_px,
                                       ImageDims dims) {
  if (kps.size() < 2) throw ParameterError("reconstruction needs at least two keypoints");
  return rasterize_image_frame(keypoints_polyline(kps), half_thickness_px, dims);
}

}  // namespace dlo
