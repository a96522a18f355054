#include "ssips/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ssips {

AffineMap AffineMap::identity(int dim) {
    return {Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim)};
}

Eigen::VectorXd AffineMap::operator()(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(dim());
    apply({x.data(), static_cast<std::size_t>(x.size())}, {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

void AffineMap::apply(std::span<const double> x, std::span<double> out) const {
    const Eigen::Index d = translation.size();
    for (Eigen::Index r = 0; r < d; ++r) {
        double acc = 0.0;
        for (Eigen::Index c = 0; c < d; ++c) acc += linear(r, c) * x[static_cast<std::size_t>(c)];
        out[static_cast<std::size_t>(r)] = acc + translation(r);
    }
}

AffineMap operator*(const AffineMap& f, const AffineMap& g) {
    return {f.linear * g.linear, f.linear * g.translation + f.translation};
}

Similitude::Similitude(Eigen::MatrixXd linear, Eigen::VectorXd translation)
    : map_{std::move(linear), std::move(translation)} {
    const auto& a = map_.linear;
    if (a.rows() != a.cols() || a.rows() != map_.translation.size() || a.rows() == 0)
        throw InvalidArgument("similitude needs a square linear part matching the translation dimension");
    const Eigen::MatrixXd gram = a.transpose() * a;
    ratio_ = std::sqrt(gram.diagonal().mean());
    if (!(ratio_ > 0.0 && ratio_ < 1.0)) throw InvalidArgument("similitude ratio must lie in (0,1)");
    const Eigen::MatrixXd defect = gram - ratio_ * ratio_ * Eigen::MatrixXd::Identity(a.rows(), a.cols());
    if (defect.cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidArgument("linear part is not a scaled orthogonal matrix");
}

Similitude Similitude::planar(double ratio, double angle, const Eigen::Vector2d& translation) {
    Eigen::Matrix2d r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return Similitude(ratio * r, translation);
}

Similitude Similitude::homothety(double ratio, const Eigen::VectorXd& translation) {
    const auto d = translation.size();
    return Similitude(ratio * Eigen::MatrixXd::Identity(d, d), translation);
}

Eigen::VectorXd fixed_point(const Similitude& s) {
    const auto d = s.dim();
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d) - s.linear();
    Eigen::VectorXd x = m.partialPivLu().solve(s.translation());
    // One refinement step keeps the residual at rounding level.
    const Eigen::VectorXd residual = s.map()(x) - x;
    x += m.partialPivLu().solve(residual);
    return x;
}

Ifs::Ifs(std::vector<Similitude> maps, std::string name, bool overlap_assumption_asserted)
    : maps_(std::move(maps)), name_(std::move(name)), overlap_asserted_(overlap_assumption_asserted) {
    if (maps_.size() < 2) throw InvalidArgument("an IFS needs at least two maps");
    if (maps_.size() > 255) throw InvalidArgument("an IFS may have at most 255 maps");
    dim_ = maps_.front().dim();
    for (const auto& m : maps_)
        if (m.dim() != dim_) throw InvalidArgument("IFS maps have different dimensions");

    fixed_points_.reserve(maps_.size());
    for (const auto& m : maps_) fixed_points_.push_back(fixed_point(m));
    bool distinct = false;
    for (const auto& p : fixed_points_)
        if ((p - fixed_points_.front()).norm() > 1e-12) distinct = true;
    if (!distinct) throw InvalidArgument("fixed points of the IFS maps are all identical");

    const Eigen::VectorXd c = fixed_point_centroid();
    double radius = 0.0;
    for (const auto& m : maps_) radius = std::max(radius, (m.map()(c) - c).norm() / (1.0 - m.ratio()));
    diameter_bound_ = 2.0 * radius;
}

Eigen::VectorXd Ifs::fixed_point_centroid() const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dim_);
    for (const auto& p : fixed_points_) c += p;
    return c / static_cast<double>(fixed_points_.size());
}

bool Ifs::has_common_linear_part(double tol) const {
    for (const auto& m : maps_)
        if ((m.linear() - maps_.front().linear()).cwiseAbs().maxCoeff() > tol) return false;
    return true;
}

double Ifs::common_ratio() const {
    const double r = maps_.front().ratio();
    for (const auto& m : maps_)
        if (std::abs(m.ratio() - r) > 1e-12) throw InvalidArgument("IFS maps have different contraction ratios");
    return r;
}

double Ifs::similarity_dimension() const {
    auto total = [&](double s) {
        double sum = 0.0;
        for (const auto& m : maps_) sum += std::pow(m.ratio(), s);
        return sum;
    };
    // sum r_i^s decreases strictly from k at s = 0.
    double lo = 0.0, hi = 1.0;
    while (total(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ProbabilityVector Ifs::natural_weights() const {
    bool equal = true;
    for (const auto& m : maps_)
        if (std::abs(m.ratio() - maps_.front().ratio()) > 1e-15) equal = false;
    if (equal) return ProbabilityVector::uniform(size());
    const double s = similarity_dimension();
    std::vector<double> w;
    double sum = 0.0;
    for (const auto& m : maps_) {
        w.push_back(std::pow(m.ratio(), s));
        sum += w.back();
    }
    for (auto& x : w) x /= sum;
    return ProbabilityVector(std::move(w));
}

AffineMap compose(const Ifs& ifs, const Word& w) {
    if (w.alphabet() != ifs.size()) throw InvalidArgument("word alphabet does not match the IFS");
    AffineMap out = AffineMap::identity(ifs.dim());
    for (int i = 0; i < w.length(); ++i) out = out * ifs.map(w.symbol(i)).map();
    return out;
}

void apply_word(const Ifs& ifs, const Word& w, std::span<double> x) {
    if (w.alphabet() != ifs.size()) throw InvalidArgument("word alphabet does not match the IFS");
    std::vector<double> tmp(x.size());
    for (int i = w.length() - 1; i >= 0; --i) {
        ifs.maps()[w.digit(i)].map().apply(x, tmp);
        std::copy(tmp.begin(), tmp.end(), x.begin());
    }
}

ProjectedPoint natural_projection(const Ifs& ifs, const Word& w, const std::optional<Eigen::VectorXd>& anchor) {
    if (w.empty()) throw InvalidArgument("natural projection needs a nonempty word");
    Eigen::VectorXd x = anchor ? *anchor : default_projection_anchor(ifs);
    if (x.size() != ifs.dim()) throw InvalidArgument("anchor dimension does not match the IFS");
    apply_word(ifs, w, {x.data(), static_cast<std::size_t>(x.size())});
    double scale = 1.0;
    for (auto d : w.digits()) scale *= ifs.maps()[d].ratio();
    return {std::move(x), scale * ifs.diameter_bound()};
}

AttractorCell attractor_cell(const Ifs& ifs, const Word& w) {
    double scale = 1.0;
    for (auto d : w.digits()) scale *= ifs.maps()[d].ratio();
    return {w, compose(ifs, w), scale * ifs.diameter_bound()};
}

Ifs canonical_interval_ifs(int k) {
    if (k < 2) throw InvalidArgument("canonical interval IFS needs k >= 2");
    std::vector<Similitude> maps;
    for (int i = 1; i <= k; ++i)
        maps.push_back(Similitude::homothety(1.0 / k, Eigen::VectorXd::Constant(1, double(i - 1) / k)));
    return Ifs(std::move(maps), "interval-" + std::to_string(k));
}

Eigen::VectorXd translation_vector(const Ifs& ifs, int i, int j) {
    if (i < 1 || j < 1 || i > ifs.size() || j > ifs.size()) throw InvalidArgument("symbol out of range");
    if (i == j) throw InvalidArgument("translation vector needs distinct symbols");
    if (!ifs.has_common_linear_part())
        throw InvalidArgument("translation vectors exist only for IFS with a common linear part");
    return ifs.map(j).translation() - ifs.map(i).translation();
}

Eigen::VectorXd PointCloud::point(std::size_t i) const {
    const auto p = (*this)[i];
    return Eigen::Map<const Eigen::VectorXd>(p.data(), dim);
}

PointCloud attractor_points(const Ifs& ifs, int m, const Eigen::VectorXd& anchor, std::uint64_t cap) {
    const int k = ifs.size();
    const auto d = static_cast<std::size_t>(ifs.dim());
    if (anchor.size() != ifs.dim()) throw InvalidArgument("anchor dimension does not match the IFS");
    const std::uint64_t n = level_size(k, m, cap);

    // x_{i.w} = f_i(x_w): level j is k shifted copies of level j-1.
    std::vector<double> cur(anchor.data(), anchor.data() + d);
    cur.reserve(n * d);
    std::vector<double> next;
    std::size_t count = 1;
    for (int level = 0; level < m; ++level) {
        next.assign(count * static_cast<std::size_t>(k) * d, 0.0);
        for (int i = 0; i < k; ++i) {
            const auto& f = ifs.maps()[static_cast<std::size_t>(i)].map();
            for (std::size_t w = 0; w < count; ++w)
                f.apply({cur.data() + w * d, d}, {next.data() + (static_cast<std::size_t>(i) * count + w) * d, d});
        }
        cur.swap(next);
        count *= static_cast<std::size_t>(k);
    }
    return {static_cast<int>(d), std::move(cur)};
}

Eigen::VectorXd default_projection_anchor(const Ifs& ifs) { return ifs.fixed_points().front(); }

Eigen::VectorXd default_quadrature_anchor(const Ifs& ifs) { return ifs.fixed_point_centroid(); }

Ifs make_preset(const std::string& name) {
    using Eigen::Vector2d;
    if (name == "sg") {
        const std::vector<Vector2d> v{{0.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}, {1.0, 0.0}};
        std::vector<Similitude> maps;
        for (const auto& vi : v) maps.push_back(Similitude::homothety(0.5, 0.5 * vi));
        return Ifs(std::move(maps), "sg");
    }
    if (name == "cantor") {
        std::vector<Similitude> maps{Similitude::homothety(1.0 / 3.0, Eigen::VectorXd::Constant(1, 0.0)),
                                     Similitude::homothety(1.0 / 3.0, Eigen::VectorXd::Constant(1, 2.0 / 3.0))};
        return Ifs(std::move(maps), "cantor");
    }
    if (name.rfind("interval-", 0) == 0) {
        int k = 0;
        try {
            k = std::stoi(name.substr(9));
        } catch (const std::exception&) {
            throw InvalidArgument("malformed interval preset '" + name + "'");
        }
        return canonical_interval_ifs(k);
    }
    if (name == "sg3") {
        // The six upward triangles of the 3x3 subdivision of the unit triangle.
        const Vector2d a{1.0 / 3.0, 0.0};
        const Vector2d b{1.0 / 6.0, std::sqrt(3.0) / 6.0};
        std::vector<Similitude> maps;
        for (int row = 0; row < 3; ++row)
            for (int col = 0; row + col < 3; ++col)
                maps.push_back(Similitude::homothety(1.0 / 3.0, col * a + row * b));
        return Ifs(std::move(maps), "sg3");
    }
    if (name == "pentagasket") {
        const double r = (3.0 - std::sqrt(5.0)) / 2.0;
        std::vector<Similitude> maps;
        for (int i = 0; i < 5; ++i) {
            const double theta = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * i / 5.0;
            const Vector2d p{std::cos(theta), std::sin(theta)};
            maps.push_back(Similitude::homothety(r, (1.0 - r) * p));
        }
        return Ifs(std::move(maps), "pentagasket");
    }
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown IFS preset '" + name + "' (known: " + known + ")");
}

std::vector<std::string> preset_names() { return {"sg", "cantor", "interval-<k>", "sg3", "pentagasket"}; }

}  // namespace ssips
