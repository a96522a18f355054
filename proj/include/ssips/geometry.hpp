#pragma once

// Affine contracting IFS on R^d: map composition along words, natural
// projection, attractor point clouds and sibling translation vectors.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssips/symbolic.hpp"

namespace ssips {

/// x -> linear * x + translation.
struct AffineMap {
    Eigen::MatrixXd linear;
    Eigen::VectorXd translation;

    static AffineMap identity(int dim);

    int dim() const noexcept { return static_cast<int>(translation.size()); }
    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
    /// Writes the image of `x` into `out`. `x` and `out` must not alias.
    void apply(std::span<const double> x, std::span<double> out) const;
};

/// f ∘ g.
AffineMap operator*(const AffineMap& f, const AffineMap& g);

/// Affine map whose linear part is ratio times an orthogonal matrix.
class Similitude {
public:
    /// Validates ||A||_2 == ratio and A^T A == ratio^2 I to 1e-10, ratio in (0,1).
    Similitude(Eigen::MatrixXd linear, Eigen::VectorXd translation);

    /// ratio * R(angle) in the plane; `angle` in radians.
    static Similitude planar(double ratio, double angle, const Eigen::Vector2d& translation);
    /// x -> ratio * x + translation (any dimension).
    static Similitude homothety(double ratio, const Eigen::VectorXd& translation);

    double ratio() const noexcept { return ratio_; }
    const AffineMap& map() const noexcept { return map_; }
    const Eigen::MatrixXd& linear() const noexcept { return map_.linear; }
    const Eigen::VectorXd& translation() const noexcept { return map_.translation; }
    int dim() const noexcept { return map_.dim(); }

private:
    AffineMap map_;
    double ratio_ = 0.0;
};

class Ifs {
public:
    /// Requires k >= 2 maps of a common dimension whose fixed points are not
    /// all identical. `overlap_assumption_asserted` records the user's claim
    /// that cylinder overlaps are null for the measures used with this IFS.
    explicit Ifs(std::vector<Similitude> maps, std::string name = "custom",
                 bool overlap_assumption_asserted = true);

    int size() const noexcept { return static_cast<int>(maps_.size()); }
    int dim() const noexcept { return dim_; }
    const std::string& name() const noexcept { return name_; }
    bool overlap_assumption_asserted() const noexcept { return overlap_asserted_; }

    /// Map for 1-based symbol i.
    const Similitude& map(int symbol) const { return maps_.at(static_cast<std::size_t>(symbol - 1)); }
    const std::vector<Similitude>& maps() const noexcept { return maps_; }

    /// Fixed points of the maps, in symbol order.
    const std::vector<Eigen::VectorXd>& fixed_points() const noexcept { return fixed_points_; }
    Eigen::VectorXd fixed_point_centroid() const;

    /// Rigorous upper bound on diam(K): twice the radius of a ball centred
    /// at the fixed-point centroid that every map sends into itself.
    double diameter_bound() const noexcept { return diameter_bound_; }

    /// True when every map has the same linear part (to `tol`).
    bool has_common_linear_part(double tol = 1e-12) const;
    /// Common contraction ratio; throws if the ratios differ.
    double common_ratio() const;

    /// s with sum r_i^s = 1.
    double similarity_dimension() const;
    /// p_i = r_i^s.
    ProbabilityVector natural_weights() const;

private:
    std::vector<Similitude> maps_;
    std::vector<Eigen::VectorXd> fixed_points_;
    std::string name_;
    int dim_ = 0;
    double diameter_bound_ = 0.0;
    bool overlap_asserted_ = true;
};

/// f_w = f_{w_1} ∘ ... ∘ f_{w_n}; the identity for the empty word.
AffineMap compose(const Ifs& ifs, const Word& w);

/// Applies f_{w_1}(f_{w_2}(...f_{w_n}(x))) map by map, in place. This is the
/// evaluation order used by attractor_points, so results agree bitwise.
void apply_word(const Ifs& ifs, const Word& w, std::span<double> x);

/// Unique x with s(x) = x.
Eigen::VectorXd fixed_point(const Similitude& s);

struct ProjectedPoint {
    Eigen::VectorXd point;
    /// |point - pi(w')| for every infinite extension w' of w.
    double error_bound = 0.0;
};

/// f_w(anchor) with truncation bound (prod r_{w_j}) * diam(K).
/// Default anchor: fixed point of f_1.
ProjectedPoint natural_projection(const Ifs& ifs, const Word& w,
                                  const std::optional<Eigen::VectorXd>& anchor = std::nullopt);

struct AttractorCell {
    Word word;
    AffineMap map;
    double diameter_bound = 0.0;
};

AttractorCell attractor_cell(const Ifs& ifs, const Word& w);

/// g_i(x) = x/k + (i-1)/k on R^1; attractor [0,1].
Ifs canonical_interval_ifs(int k);

/// tau_ij = translation(f_j) - translation(f_i), so that f_j(K) = f_i(K) + tau_ij.
/// Symbols are 1-based. Requires a common linear part.
Eigen::VectorXd translation_vector(const Ifs& ifs, int i, int j);

/// Flat row-major cloud of points in R^dim.
struct PointCloud {
    int dim = 0;
    std::vector<double> coords;

    std::size_t size() const noexcept { return dim ? coords.size() / static_cast<std::size_t>(dim) : 0; }
    std::span<const double> operator[](std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    Eigen::VectorXd point(std::size_t i) const;
};

/// x_w = f_w(anchor) for all |w| = m in lexicographic order.
PointCloud attractor_points(const Ifs& ifs, int m, const Eigen::VectorXd& anchor,
                            std::uint64_t cap = default_limits().max_cells);

/// Fixed point of f_1.
Eigen::VectorXd default_projection_anchor(const Ifs& ifs);
/// Centroid of the fixed points. For equal-ratio homothety IFS with the
/// natural measure this is the barycentre of the measure.
Eigen::VectorXd default_quadrature_anchor(const Ifs& ifs);

/// Built-in IFS: "sg", "cantor", "interval-<k>", "sg3", "pentagasket".
Ifs make_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace ssips
