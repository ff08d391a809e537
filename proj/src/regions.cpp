#include "attractors/regions.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace attr {

namespace {

constexpr double kOutside = -std::numeric_limits<double>::infinity();
constexpr int kMaxRandom = 1 << 18;

bool flat_2d(const Manifold& m) {
  return m.dim() == 2 && m.storage() == 2 &&
         (m.kind() == PointKind::Torus || m.kind() == PointKind::Quotient);
}

std::vector<Vec> grid_2d(const Manifold& m, int res) {
  std::vector<Vec> out;
  out.reserve(static_cast<size_t>(res) * res);
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < res; ++j) out.push_back(m.canonical(Eigen::Vector2d((i + 0.5) / res, (j + 0.5) / res)));
  return out;
}

Vec random_unit(int d, Rng& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = N(rng);
  } while (v.norm() < 1e-9);
  return v / v.norm();
}

int random_count(int res) { return static_cast<int>(std::min<long>(static_cast<long>(res) * res, kMaxRandom)); }

class WholeRegion final : public Region {
 public:
  explicit WholeRegion(ManifoldPtr m) : m_(std::move(m)) {}
  std::string describe() const override { return "whole " + m_->name(); }
  double depth(const Vec&) const override { return 1.0; }
  bool proper() const override { return false; }
  std::vector<Vec> sample(int res, Rng& rng) const override {
    if (flat_2d(*m_)) return grid_2d(*m_, res);
    std::vector<Vec> out;
    for (int i = 0; i < random_count(res); ++i) out.push_back(m_->random_point(rng));
    return out;
  }

 private:
  ManifoldPtr m_;
};

class BallRegion final : public Region {
 public:
  BallRegion(ManifoldPtr m, Vec c, double r, bool complement)
      : m_(std::move(m)), c_(std::move(c)), r_(r), complement_(complement) {
    if (!(r > 0)) throw std::invalid_argument("ball radius must be positive");
  }
  std::string describe() const override {
    return std::string(complement_ ? "complement of ball" : "ball") + " radius " + std::to_string(r_) + " in " +
           m_->name();
  }
  double depth(const Vec& x) const override {
    const double d = m_->log(c_, x).norm();
    return complement_ ? d - r_ : r_ - d;
  }
  std::vector<Vec> sample(int res, Rng& rng) const override {
    std::vector<Vec> out;
    const int d = m_->dim();
    if (complement_ && flat_2d(*m_)) {
      for (auto& p : grid_2d(*m_, res))
        if (depth(p) >= 0) out.push_back(std::move(p));
    } else {
      std::uniform_real_distribution<double> U(0.0, 1.0);
      const int n = random_count(res);
      for (int i = 0, tries = 0; i < n && tries < 8 * n; ++tries) {
        Vec p = complement_ ? m_->random_point(rng)
                            : m_->retract(c_, random_unit(d, rng) * (r_ * std::pow(U(rng), 1.0 / d)));
        if (depth(p) >= 0) {
          out.push_back(std::move(p));
          ++i;
        }
      }
    }
    const int nb = std::max(64, 4 * res);
    for (int i = 0; i < nb; ++i) {
      Vec dir = d == 2 ? Vec(Eigen::Vector2d(std::cos(2 * std::numbers::pi * i / nb),
                                             std::sin(2 * std::numbers::pi * i / nb)))
                       : random_unit(d, rng);
      out.push_back(m_->retract(c_, dir * r_));
    }
    return out;
  }

 private:
  ManifoldPtr m_;
  Vec c_;
  double r_;
  bool complement_;
};

class CollarRegion final : public Region {
 public:
  CollarRegion(ManifoldPtr tube, RegionPtr base, double w) : m_(std::move(tube)), base_(std::move(base)), w_(w) {}
  std::string describe() const override {
    return "collar |rho-1|<=" + std::to_string(w_) + " over " + base_->describe();
  }
  double depth(const Vec& x) const override {
    const int n = static_cast<int>(x.size()) - 1;
    return std::min(w_ - std::abs(x(n) - 1.0), base_->depth(x.head(n)));
  }
  std::vector<Vec> sample(int res, Rng& rng) const override {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Vec> out;
    const auto base = base_->sample(res, rng);
    for (size_t i = 0; i < base.size(); ++i) {
      Vec p(base[i].size() + 1);
      p.head(base[i].size()) = base[i];
      // every eighth sample sits on a collar face
      p(base[i].size()) = 1.0 + (i % 8 == 0 ? (i % 16 == 0 ? w_ : -w_) : w_ * U(rng));
      out.push_back(std::move(p));
    }
    return out;
  }

 private:
  ManifoldPtr m_;
  RegionPtr base_;
  double w_;
};

class ProductRegion final : public Region {
 public:
  ProductRegion(ManifoldPtr m, std::vector<RegionPtr> f) : m_(std::move(m)), f_(std::move(f)) {
    off_ = product_offsets(*m_);
    if (off_.size() != f_.size() + 1) throw std::invalid_argument("product region: factor count mismatch");
  }
  std::string describe() const override {
    std::string s;
    for (size_t i = 0; i < f_.size(); ++i) s += (i ? " x " : "") + f_[i]->describe();
    return "product(" + s + ")";
  }
  double depth(const Vec& x) const override {
    double d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < f_.size(); ++i) d = std::min(d, f_[i]->depth(x.segment(off_[i], off_[i + 1] - off_[i])));
    return d;
  }
  std::vector<Vec> sample(int res, Rng& rng) const override {
    std::vector<std::vector<Vec>> parts;
    for (const auto& f : f_) parts.push_back(f->sample(res, rng));
    const int n = random_count(res);
    std::vector<Vec> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
      Vec p(m_->storage());
      for (size_t i = 0; i < f_.size(); ++i) {
        std::uniform_int_distribution<size_t> pick(0, parts[i].size() - 1);
        p.segment(off_[i], off_[i + 1] - off_[i]) = parts[i][pick(rng)];
      }
      out.push_back(std::move(p));
    }
    return out;
  }

 private:
  ManifoldPtr m_;
  std::vector<RegionPtr> f_;
  std::vector<int> off_;
};

class SlicedRegion final : public Region {
 public:
  SlicedRegion(ManifoldPtr whole, int off, int len, RegionPtr inner, int flag, double flag_value)
      : m_(std::move(whole)), off_(off), len_(len), inner_(std::move(inner)), flag_(flag), flag_value_(flag_value) {}
  std::string describe() const override { return inner_->describe() + " inside " + m_->name(); }
  double depth(const Vec& x) const override {
    if (flag_ >= 0 && x(flag_) != flag_value_) return kOutside;
    return inner_->depth(x.segment(off_, len_));
  }
  std::vector<Vec> sample(int res, Rng& rng) const override {
    std::vector<Vec> out;
    for (const auto& s : inner_->sample(res, rng)) {
      Vec p = m_->random_point(rng);
      if (flag_ >= 0) p(flag_) = flag_value_;
      p.segment(off_, len_) = s;
      out.push_back(std::move(p));
    }
    return out;
  }

 private:
  ManifoldPtr m_;
  int off_, len_;
  RegionPtr inner_;
  int flag_;
  double flag_value_;
};

}  // namespace

RegionPtr whole_region(ManifoldPtr m) { return std::make_shared<WholeRegion>(std::move(m)); }
RegionPtr ball_region(ManifoldPtr m, Vec c, double r) {
  return std::make_shared<BallRegion>(std::move(m), std::move(c), r, false);
}
RegionPtr ball_complement_region(ManifoldPtr m, Vec c, double r) {
  return std::make_shared<BallRegion>(std::move(m), std::move(c), r, true);
}
RegionPtr collar_region(ManifoldPtr tube, RegionPtr base, double w) {
  return std::make_shared<CollarRegion>(std::move(tube), std::move(base), w);
}
RegionPtr product_region(ManifoldPtr product, std::vector<RegionPtr> factors) {
  return std::make_shared<ProductRegion>(std::move(product), std::move(factors));
}
RegionPtr sliced_region(ManifoldPtr whole, int offset, int length, RegionPtr inner, int flag_index,
                        double flag_value) {
  return std::make_shared<SlicedRegion>(std::move(whole), offset, length, std::move(inner), flag_index, flag_value);
}

}  // namespace attr

namespace attr {

MarginReport check_region(const SystemSpec& sys, const Region& region, int resolution, double delta,
                          std::uint64_t seed) {
  Rng rng(seed);
  const auto pts = region.sample(resolution, rng);
  MarginReport r;
  r.proper = region.proper();
  r.samples = pts.size();
  r.margin = std::numeric_limits<double>::infinity();
  for (const auto& x : pts) {
    const Vec y = sys.is_flow ? sys.flow(x, 1.0) : sys.forward(x);
    const double d = region.depth(y);
    if (d < r.margin) {
      r.margin = d;
      r.worst = x;
    }
  }
  r.pass = !pts.empty() && r.margin >= delta;
  return r;
}

}  // namespace attr
