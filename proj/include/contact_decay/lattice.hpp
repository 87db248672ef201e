#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace contact_decay {

using Coord = std::int32_t;

// A site of the unbounded lattice Z^d.
class Site {
 public:
  Site() = default;
  explicit Site(std::vector<Coord> coords);

  static Site origin(int d);
  // Unit vector along axis `axis` (0-based), so unit(d, 0) is e_1.
  static Site unit(int d, int axis = 0);

  int dim() const { return static_cast<int>(coords_.size()); }
  Coord operator[](int axis) const { return coords_[static_cast<std::size_t>(axis)]; }
  std::span<const Coord> coords() const { return coords_; }
  bool is_origin() const;

  // Coordinate-wise step; throws std::overflow_error on Coord overflow.
  Site shifted(int axis, int sign) const;

  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;

  std::string to_string() const;

 private:
  std::vector<Coord> coords_;
};

// Neighbors of x in Z^d in the fixed order +e1, -e1, +e2, -e2, ...
std::vector<Site> neighbors(const Site& x);

// Finite torus (Z / L Z)^d with L even.
class Torus {
 public:
  Torus(int d, int side);

  int dim() const { return d_; }
  int side() const { return side_; }
  std::size_t size() const { return size_; }
  int degree() const { return 2 * d_; }

  // Coordinates must already be reduced into [0, L).
  std::size_t index(const Site& x) const;
  Site site(std::size_t index) const;
  // Reduces arbitrary coordinates modulo L first.
  std::size_t wrap_index(const Site& x) const;

  std::size_t origin() const { return 0; }

  // Same fixed order as the unbounded neighbors().
  std::span<const std::size_t> neighbors(std::size_t index) const {
    return {table_.data() + index * static_cast<std::size_t>(2 * d_),
            static_cast<std::size_t>(2 * d_)};
  }
  std::vector<Site> neighbors(const Site& x) const;

 private:
  int d_;
  int side_;
  std::size_t size_;
  std::vector<std::size_t> stride_;
  std::vector<std::size_t> table_;
};

// Cube [-M, M]^d of Z^d with a dense linear index. Used for the truncated
// linear systems and moment ODEs.
class Box {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Box(int d, int radius);

  int dim() const { return d_; }
  int radius() const { return radius_; }
  std::size_t size() const { return size_; }

  bool contains(const Site& x) const;
  std::size_t index(const Site& x) const;  // npos when outside
  Site site(std::size_t index) const;
  std::size_t origin() const { return origin_; }

  // Neighbor of `index` in direction slot k (same order as neighbors()),
  // or npos when the neighbor lies outside the box.
  std::size_t neighbor(std::size_t index, int slot) const;

  // Sup-norm distance of a site from the origin.
  int linf(std::size_t index) const;

 private:
  int d_;
  int radius_;
  int width_;
  std::size_t size_;
  std::size_t origin_;
  std::vector<std::size_t> stride_;
};

// Packs a site of Z^d into one 128-bit key (min(32, 128/d) bits per
// coordinate, biased), so d <= 32. Used for the set-valued dual processes,
// which stay near the origin.
class SiteCodec {
 public:
  using Key = unsigned __int128;

  explicit SiteCodec(int d);

  int dim() const { return d_; }
  Coord max_coord() const { return max_; }

  Key encode(const Site& x) const;
  Site decode(Key key) const;
  Key origin() const { return origin_key_; }

  // Key of the neighbor in slot k; throws std::overflow_error when the
  // coordinate leaves the representable range.
  Key neighbor(Key key, int slot) const;

 private:
  int d_;
  int bits_;
  Coord max_;
  Key mask_;
  Key origin_key_;
};

struct KeyHash {
  std::size_t operator()(SiteCodec::Key k) const noexcept {
    return static_cast<std::size_t>(fold(k));
  }
  // 64-bit mix of both halves.
  static std::uint64_t fold(SiteCodec::Key k) noexcept {
    std::uint64_t z = static_cast<std::uint64_t>(k) ^
                      (static_cast<std::uint64_t>(k >> 64) * 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

}  // namespace contact_decay
