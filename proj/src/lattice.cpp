#include "contact_decay/lattice.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace contact_decay {

namespace {

void require_dim(int d) {
  if (d < 1) throw std::invalid_argument("lattice dimension must be >= 1");
}

}  // namespace

Site::Site(std::vector<Coord> coords) : coords_(std::move(coords)) {
  require_dim(dim());
}

Site Site::origin(int d) {
  require_dim(d);
  return Site(std::vector<Coord>(static_cast<std::size_t>(d), 0));
}

Site Site::unit(int d, int axis) {
  require_dim(d);
  if (axis < 0 || axis >= d) throw std::out_of_range("unit vector axis out of range");
  std::vector<Coord> c(static_cast<std::size_t>(d), 0);
  c[static_cast<std::size_t>(axis)] = 1;
  return Site(std::move(c));
}

bool Site::is_origin() const {
  for (Coord c : coords_)
    if (c != 0) return false;
  return true;
}

Site Site::shifted(int axis, int sign) const {
  auto c = coords_;
  auto& v = c.at(static_cast<std::size_t>(axis));
  if ((sign > 0 && v == std::numeric_limits<Coord>::max()) ||
      (sign < 0 && v == std::numeric_limits<Coord>::min()))
    throw std::overflow_error("site coordinate overflow");
  v += sign > 0 ? 1 : -1;
  return Site(std::move(c));
}

std::string Site::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < coords_.size(); ++i) os << (i ? "," : "") << coords_[i];
  os << ')';
  return os.str();
}

std::vector<Site> neighbors(const Site& x) {
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(2 * x.dim()));
  for (int axis = 0; axis < x.dim(); ++axis) {
    out.push_back(x.shifted(axis, +1));
    out.push_back(x.shifted(axis, -1));
  }
  return out;
}

// ---------------------------------------------------------------- Torus

Torus::Torus(int d, int side) : d_(d), side_(side), size_(1) {
  require_dim(d);
  if (side < 4 || side % 2 != 0)
    throw std::invalid_argument("torus side must be even and >= 4");
  stride_.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    stride_[static_cast<std::size_t>(i)] = size_;
    if (size_ > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(side))
      throw std::overflow_error("torus too large");
    size_ *= static_cast<std::size_t>(side);
  }
  const auto deg = static_cast<std::size_t>(2 * d);
  table_.resize(size_ * deg);
  const auto L = static_cast<std::size_t>(side);
  for (std::size_t idx = 0; idx < size_; ++idx) {
    for (int axis = 0; axis < d; ++axis) {
      const std::size_t s = stride_[static_cast<std::size_t>(axis)];
      const std::size_t c = (idx / s) % L;
      const std::size_t up = c + 1 == L ? idx - c * s : idx + s;
      const std::size_t down = c == 0 ? idx + (L - 1) * s : idx - s;
      table_[idx * deg + static_cast<std::size_t>(2 * axis)] = up;
      table_[idx * deg + static_cast<std::size_t>(2 * axis + 1)] = down;
    }
  }
}

std::size_t Torus::index(const Site& x) const {
  if (x.dim() != d_) throw std::invalid_argument("site dimension does not match torus");
  std::size_t idx = 0;
  for (int i = 0; i < d_; ++i) {
    const Coord c = x[i];
    if (c < 0 || c >= side_) throw std::out_of_range("torus coordinate not reduced mod L");
    idx += static_cast<std::size_t>(c) * stride_[static_cast<std::size_t>(i)];
  }
  return idx;
}

std::size_t Torus::wrap_index(const Site& x) const {
  if (x.dim() != d_) throw std::invalid_argument("site dimension does not match torus");
  std::vector<Coord> c(x.coords().begin(), x.coords().end());
  for (auto& v : c) v = ((v % side_) + side_) % side_;
  return index(Site(std::move(c)));
}

Site Torus::site(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("torus index out of range");
  std::vector<Coord> c(static_cast<std::size_t>(d_));
  for (int i = 0; i < d_; ++i) {
    c[static_cast<std::size_t>(i)] = static_cast<Coord>(index % static_cast<std::size_t>(side_));
    index /= static_cast<std::size_t>(side_);
  }
  return Site(std::move(c));
}

std::vector<Site> Torus::neighbors(const Site& x) const {
  std::vector<Site> out;
  for (std::size_t n : neighbors(index(x))) out.push_back(site(n));
  return out;
}

// ---------------------------------------------------------------- Box

Box::Box(int d, int radius) : d_(d), radius_(radius), width_(2 * radius + 1), size_(1) {
  require_dim(d);
  if (radius < 0) throw std::invalid_argument("box radius must be >= 0");
  stride_.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    stride_[static_cast<std::size_t>(i)] = size_;
    size_ *= static_cast<std::size_t>(width_);
  }
  origin_ = index(Site::origin(d));
}

bool Box::contains(const Site& x) const {
  if (x.dim() != d_) throw std::invalid_argument("site dimension does not match box");
  for (Coord c : x.coords())
    if (c < -radius_ || c > radius_) return false;
  return true;
}

std::size_t Box::index(const Site& x) const {
  if (!contains(x)) return npos;
  std::size_t idx = 0;
  for (int i = 0; i < d_; ++i)
    idx += static_cast<std::size_t>(x[i] + radius_) * stride_[static_cast<std::size_t>(i)];
  return idx;
}

Site Box::site(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("box index out of range");
  std::vector<Coord> c(static_cast<std::size_t>(d_));
  for (int i = 0; i < d_; ++i) {
    c[static_cast<std::size_t>(i)] =
        static_cast<Coord>(index % static_cast<std::size_t>(width_)) - radius_;
    index /= static_cast<std::size_t>(width_);
  }
  return Site(std::move(c));
}

std::size_t Box::neighbor(std::size_t index, int slot) const {
  const int axis = slot / 2;
  const std::size_t s = stride_[static_cast<std::size_t>(axis)];
  const auto c = static_cast<int>((index / s) % static_cast<std::size_t>(width_));
  if (slot % 2 == 0) return c + 1 < width_ ? index + s : npos;
  return c > 0 ? index - s : npos;
}

int Box::linf(std::size_t index) const {
  int m = 0;
  for (int i = 0; i < d_; ++i) {
    const int c = static_cast<int>(index % static_cast<std::size_t>(width_)) - radius_;
    m = std::max(m, c < 0 ? -c : c);
    index /= static_cast<std::size_t>(width_);
  }
  return m;
}

// ---------------------------------------------------------------- SiteCodec

SiteCodec::SiteCodec(int d) : d_(d) {
  require_dim(d);
  bits_ = std::min(32, 128 / d);
  if (bits_ < 4) throw std::invalid_argument("SiteCodec supports d <= 32");
  max_ = static_cast<Coord>((std::uint64_t{1} << (bits_ - 1)) - 1);
  mask_ = (Key{1} << bits_) - 1;
  origin_key_ = encode(Site::origin(d));
}

SiteCodec::Key SiteCodec::encode(const Site& x) const {
  if (x.dim() != d_) throw std::invalid_argument("site dimension does not match codec");
  Key key = 0;
  for (int i = 0; i < d_; ++i) {
    const Coord c = x[i];
    if (c > max_ || c < -max_) throw std::overflow_error("site outside codec range");
    key |= (static_cast<Key>(static_cast<std::int64_t>(c) + max_) & mask_) << (i * bits_);
  }
  return key;
}

Site SiteCodec::decode(Key key) const {
  std::vector<Coord> c(static_cast<std::size_t>(d_));
  for (int i = 0; i < d_; ++i)
    c[static_cast<std::size_t>(i)] =
        static_cast<Coord>(static_cast<std::int64_t>((key >> (i * bits_)) & mask_) - max_);
  return Site(std::move(c));
}

SiteCodec::Key SiteCodec::neighbor(Key key, int slot) const {
  const int shift = (slot / 2) * bits_;
  const auto biased = static_cast<std::int64_t>((key >> shift) & mask_);
  const std::int64_t next = biased + (slot % 2 == 0 ? 1 : -1);
  if (next < 0 || next > 2 * static_cast<std::int64_t>(max_))
    throw std::overflow_error("dual front left the representable lattice range");
  return (key & ~(mask_ << shift)) | (static_cast<Key>(next) << shift);
}

}  // namespace contact_decay
