#pragma once

#include <span>
#include <vector>

#include "roughkit/common.hpp"

namespace roughkit {

// Values are immutable after construction and every operation here is a pure
// function, so everything is safe to share across threads.

// Element of the truncated tensor algebra T^n(R^d), n in {2,3}.
// Components are dense row-major: c2[i*dim+j], c3[(i*dim+j)*dim+k].
struct TruncatedTensor {
    int dim = 0;
    int level = 2;
    double c0 = 0.0;
    std::vector<double> c1;
    std::vector<double> c2;
    std::vector<double> c3;  // present iff level == 3

    static TruncatedTensor zero(int dim, int level);

    double& at2(int i, int j) { return c2[static_cast<std::size_t>(i) * dim + j]; }
    double at2(int i, int j) const { return c2[static_cast<std::size_t>(i) * dim + j]; }
    double& at3(int i, int j, int k) {
        return c3[(static_cast<std::size_t>(i) * dim + j) * dim + k];
    }
    double at3(int i, int j, int k) const {
        return c3[(static_cast<std::size_t>(i) * dim + j) * dim + k];
    }

    void check_shape() const;  // throws UsageError on malformed element
    bool finite() const;
};

// Group element: scalar component pinned to 1.
struct GroupElement {
    TruncatedTensor t;

    GroupElement() = default;
    explicit GroupElement(TruncatedTensor tt);

    int dim() const { return t.dim; }
    int level() const { return t.level; }

    static GroupElement identity(int dim, int level);
};

// graded convolution, components above `level` discarded
TruncatedTensor tensor_multiply(const TruncatedTensor& a, const TruncatedTensor& b);
GroupElement group_multiply(const GroupElement& a, const GroupElement& b);

// truncated power series; exact inverses of each other by nilpotency
GroupElement exp_trunc(const TruncatedTensor& x);  // requires c0 == 0
TruncatedTensor log_trunc(const GroupElement& g);

// convenience: exp of a pure level-1 element
GroupElement exp_level1(std::span<const double> v, int level);

GroupElement group_inverse(const GroupElement& g);

// delta_lambda: level-k component scaled by lambda^k
GroupElement dilate(const GroupElement& g, double lambda);

// max_i (i! |x_i|)^(1/i) with the Frobenius norm on each level
double homogeneous_norm(const GroupElement& g);

// d(g,h) = ||g^-1 (x) h||
double group_distance(const GroupElement& g, const GroupElement& h);

// max absolute violation over the shuffle identities up to the element's level;
// ~0 exactly for elements produced by signature lifting
double shuffle_defect(const GroupElement& g);

// Minus: G^2(R^d (+) R^d) -> G^2(R^d),
// (1, Z^{1;1} (+) Z^{1;2}, [Z^{2;b,b'}]) -> (1, Z^{1;2}-Z^{1;1},
//   Z^{2;2,2}-Z^{2;1,2}-Z^{2;2,1}+Z^{2;1,1}).
// Induced by (x,y) -> y-x, hence a group homomorphism.
GroupElement minus_map(const GroupElement& z);

}  // namespace roughkit
