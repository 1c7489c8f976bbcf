#include "roughkit/algebra.hpp"

#include <cmath>
#include <cstddef>

namespace roughkit {

namespace {

double sq_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

void check_compatible(const TruncatedTensor& a, const TruncatedTensor& b) {
    if (a.dim != b.dim || a.level != b.level)
        throw UsageError("tensor dim/level mismatch");
}

}  // namespace

TruncatedTensor TruncatedTensor::zero(int dim, int level) {
    if (dim < 1) throw UsageError("tensor dim must be >= 1");
    if (level != 2 && level != 3) throw UsageError("tensor level must be 2 or 3");
    TruncatedTensor t;
    t.dim = dim;
    t.level = level;
    t.c1.assign(static_cast<std::size_t>(dim), 0.0);
    t.c2.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    if (level == 3) t.c3.assign(static_cast<std::size_t>(dim) * dim * dim, 0.0);
    return t;
}

void TruncatedTensor::check_shape() const {
    if (dim < 1) throw UsageError("tensor dim must be >= 1");
    if (level != 2 && level != 3) throw UsageError("tensor level must be 2 or 3");
    const auto d = static_cast<std::size_t>(dim);
    if (c1.size() != d || c2.size() != d * d)
        throw UsageError("tensor component shape mismatch");
    if (level == 3 && c3.size() != d * d * d)
        throw UsageError("tensor level-3 component shape mismatch");
    if (level == 2 && !c3.empty())
        throw UsageError("level-2 tensor carries a level-3 component");
    if (!finite()) throw UsageError("tensor has non-finite entries");
}

bool TruncatedTensor::finite() const {
    if (!std::isfinite(c0)) return false;
    for (double x : c1)
        if (!std::isfinite(x)) return false;
    for (double x : c2)
        if (!std::isfinite(x)) return false;
    for (double x : c3)
        if (!std::isfinite(x)) return false;
    return true;
}

GroupElement::GroupElement(TruncatedTensor tt) : t(std::move(tt)) {
    if (t.c0 != 1.0) throw UsageError("group element must have scalar component 1");
}

GroupElement GroupElement::identity(int dim, int level) {
    TruncatedTensor t = TruncatedTensor::zero(dim, level);
    t.c0 = 1.0;
    return GroupElement(std::move(t));
}

TruncatedTensor tensor_multiply(const TruncatedTensor& a, const TruncatedTensor& b) {
    check_compatible(a, b);
    const int d = a.dim;
    TruncatedTensor out = TruncatedTensor::zero(d, a.level);
    out.c0 = a.c0 * b.c0;

    for (int i = 0; i < d; ++i) out.c1[i] = a.c0 * b.c1[i] + a.c1[i] * b.c0;

    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out.at2(i, j) = a.c0 * b.at2(i, j) + a.c1[i] * b.c1[j] + a.at2(i, j) * b.c0;

    if (a.level == 3) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    out.at3(i, j, k) = a.c0 * b.at3(i, j, k) + a.c1[i] * b.at2(j, k) +
                                       a.at2(i, j) * b.c1[k] + a.at3(i, j, k) * b.c0;
    }
    return out;
}

GroupElement group_multiply(const GroupElement& a, const GroupElement& b) {
    return GroupElement(tensor_multiply(a.t, b.t));
}

GroupElement exp_trunc(const TruncatedTensor& x) {
    if (x.c0 != 0.0) throw UsageError("exp_trunc requires scalar component 0");
    TruncatedTensor acc = x;  // x
    TruncatedTensor out = x;
    out.c0 = 1.0;
    acc = tensor_multiply(acc, x);  // x^2
    const int d = x.dim;
    for (std::size_t i = 0; i < acc.c2.size(); ++i) out.c2[i] += acc.c2[i] / 2.0;
    if (x.level == 3) {
        for (std::size_t i = 0; i < acc.c3.size(); ++i) out.c3[i] += acc.c3[i] / 2.0;
        acc = tensor_multiply(acc, x);  // x^3
        for (std::size_t i = 0; i < acc.c3.size(); ++i) out.c3[i] += acc.c3[i] / 6.0;
    }
    (void)d;
    return GroupElement(std::move(out));
}

TruncatedTensor log_trunc(const GroupElement& g) {
    TruncatedTensor u = g.t;  // u = g - 1
    u.c0 = 0.0;
    TruncatedTensor out = u;
    TruncatedTensor acc = tensor_multiply(u, u);  // u^2
    for (std::size_t i = 0; i < acc.c2.size(); ++i) out.c2[i] -= acc.c2[i] / 2.0;
    if (u.level == 3) {
        for (std::size_t i = 0; i < acc.c3.size(); ++i) out.c3[i] -= acc.c3[i] / 2.0;
        acc = tensor_multiply(acc, u);  // u^3
        for (std::size_t i = 0; i < acc.c3.size(); ++i) out.c3[i] += acc.c3[i] / 3.0;
    }
    return out;
}

GroupElement exp_level1(std::span<const double> v, int level) {
    TruncatedTensor x = TruncatedTensor::zero(static_cast<int>(v.size()), level);
    for (std::size_t i = 0; i < v.size(); ++i) x.c1[i] = v[i];
    return exp_trunc(x);
}

GroupElement group_inverse(const GroupElement& g) {
    // Neumann series (1+u)^-1 = 1 - u + u^2 - u^3, exact by nilpotency
    TruncatedTensor u = g.t;
    u.c0 = 0.0;
    TruncatedTensor out = TruncatedTensor::zero(u.dim, u.level);
    out.c0 = 1.0;
    for (std::size_t i = 0; i < u.c1.size(); ++i) out.c1[i] = -u.c1[i];
    TruncatedTensor acc = tensor_multiply(u, u);
    for (std::size_t i = 0; i < u.c2.size(); ++i) out.c2[i] = acc.c2[i] - u.c2[i];
    if (u.level == 3) {
        for (std::size_t i = 0; i < u.c3.size(); ++i) out.c3[i] = acc.c3[i] - u.c3[i];
        acc = tensor_multiply(acc, u);
        for (std::size_t i = 0; i < u.c3.size(); ++i) out.c3[i] -= acc.c3[i];
    }
    return GroupElement(std::move(out));
}

GroupElement dilate(const GroupElement& g, double lambda) {
    GroupElement out = g;
    const double l2 = lambda * lambda;
    for (double& x : out.t.c1) x *= lambda;
    for (double& x : out.t.c2) x *= l2;
    if (g.level() == 3) {
        const double l3 = l2 * lambda;
        for (double& x : out.t.c3) x *= l3;
    }
    return out;
}

double homogeneous_norm(const GroupElement& g) {
    double n = std::sqrt(sq_norm(g.t.c1));
    n = std::max(n, std::sqrt(2.0 * std::sqrt(sq_norm(g.t.c2))));
    if (g.level() == 3) n = std::max(n, std::cbrt(6.0 * std::sqrt(sq_norm(g.t.c3))));
    return n;
}

double group_distance(const GroupElement& g, const GroupElement& h) {
    check_compatible(g.t, h.t);
    if (g.level() == 2) {
        // ||g^-1 (x) h|| expanded: level 1 is h1-g1, level 2 is
        // h2 - g2 - g1 (x) (h1-g1); avoids the temporaries
        const int d = g.dim();
        double n1 = 0.0;
        for (int i = 0; i < d; ++i) {
            const double v = h.t.c1[i] - g.t.c1[i];
            n1 += v * v;
        }
        double n2 = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double v = h.t.at2(i, j) - g.t.at2(i, j) -
                                 g.t.c1[i] * (h.t.c1[j] - g.t.c1[j]);
                n2 += v * v;
            }
        return std::max(std::sqrt(n1), std::sqrt(2.0 * std::sqrt(n2)));
    }
    return homogeneous_norm(group_multiply(group_inverse(g), h));
}

double shuffle_defect(const GroupElement& g) {
    const int d = g.dim();
    double worst = 0.0;
    // (i) shuffle (j): sym(x2)[i,j] = x1[i] x1[j] / 2
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double v =
                0.5 * (g.t.at2(i, j) + g.t.at2(j, i)) - 0.5 * g.t.c1[i] * g.t.c1[j];
            worst = std::max(worst, std::fabs(v));
        }
    if (g.level() == 3) {
        // (i) shuffle (j,k): x1[i] x2[j,k] = x3[i,j,k] + x3[j,i,k] + x3[j,k,i]
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    const double v = g.t.c1[i] * g.t.at2(j, k) - g.t.at3(i, j, k) -
                                     g.t.at3(j, i, k) - g.t.at3(j, k, i);
                    worst = std::max(worst, std::fabs(v));
                }
    }
    return worst;
}

GroupElement minus_map(const GroupElement& z) {
    if (z.level() != 2) throw UsageError("minus_map supports level 2 only");
    if (z.dim() % 2 != 0) throw UsageError("minus_map requires even dimension");
    const int d = z.dim() / 2;
    TruncatedTensor out = TruncatedTensor::zero(d, 2);
    out.c0 = 1.0;
    for (int i = 0; i < d; ++i) out.c1[i] = z.t.c1[d + i] - z.t.c1[i];
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out.at2(i, j) = z.t.at2(d + i, d + j) - z.t.at2(i, d + j) -
                            z.t.at2(d + i, j) + z.t.at2(i, j);
    return GroupElement(std::move(out));
}

// ---- rng ----

namespace {
std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(RngSpec spec) {
    std::uint64_t x = spec.seed;
    (void)splitmix64(x);
    x ^= 0xd1b54a32d192ed03ULL * (spec.stream + 1);
    for (auto& si : s_) si = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    // (0,1]: 53 random bits, then flip so 0 is excluded
    return 1.0 - static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

}  // namespace roughkit
