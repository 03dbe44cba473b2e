#include "fac/jet.hpp"

namespace fac::taylor {

Series from_jet(const Jet& j) {
    Series c(j.d.size());
    Scalar fact(1);
    for (size_t k = 0; k < j.d.size(); ++k) {
        if (k > 1) fact *= static_cast<long>(k);
        c[k] = (k <= 1) ? j.d[k] : j.d[k] / fact;
    }
    return c;
}

Jet to_jet(const Series& c, const Scalar& base_point) {
    Jet j;
    j.base_point = base_point;
    j.d.resize(c.size());
    Scalar fact(1);
    for (size_t k = 0; k < c.size(); ++k) {
        if (k > 1) fact *= static_cast<long>(k);
        j.d[k] = (k <= 1) ? c[k] : c[k] * fact;
    }
    return j;
}

Series mul(const Series& a, const Series& b) {
    const size_t n = a.size();
    Series out(n, Scalar(0));
    for (size_t i = 0; i < n; ++i) {
        if (a[i] == 0) continue;
        const size_t jmax = n - i;
        for (size_t j = 0; j < jmax && j < b.size(); ++j)
            out[i + j] += a[i] * b[j];
    }
    return out;
}

void mul_inplace(Series& acc, const Series& b) { acc = mul(acc, b); }

Series compose(const Series& g, const Series& f) {
    const size_t n = f.size();
    Series fs = f;          // f with constant term removed
    fs[0] = 0;
    Series out(n, Scalar(0));
    // Horner over the nilpotent part of f
    for (size_t k = g.size(); k-- > 0;) {
        out = mul(out, fs);
        out[0] += g[k];
    }
    return out;
}

Series reciprocal(const Series& a) {
    const size_t n = a.size();
    if (a[0] == 0) throw NonConvergence("taylor::reciprocal at zero");
    Series out(n, Scalar(0));
    out[0] = 1 / a[0];
    for (size_t k = 1; k < n; ++k) {
        Scalar s(0);
        for (size_t j = 1; j <= k; ++j) s += a[j] * out[k - j];
        out[k] = -s / a[0];
    }
    return out;
}

Series exp(const Series& a) {
    const size_t n = a.size();
    Series out(n, Scalar(0));
    out[0] = boost::multiprecision::exp(a[0]);
    // out' = a' * out  =>  k*out[k] = sum_{j=1..k} j*a[j]*out[k-j]
    for (size_t k = 1; k < n; ++k) {
        Scalar s(0);
        for (size_t j = 1; j <= k; ++j) s += Scalar(static_cast<long>(j)) * a[j] * out[k - j];
        out[k] = s / static_cast<long>(k);
    }
    return out;
}

Series revert(const Series& f) {
    const size_t n = f.size();
    if (f[0] != 0) throw NonConvergence("taylor::revert needs f(0)=0");
    if (f[1] == 0) throw NonConvergence("taylor::revert needs f'(0)!=0");
    Series g(n, Scalar(0));
    g[1] = 1 / f[1];
    // order-by-order: coefficient k of g(f) must vanish for k >= 2
    for (size_t k = 2; k < n; ++k) {
        Series trunc(g.begin(), g.begin() + static_cast<long>(k));
        trunc.resize(n, Scalar(0));
        Series comp = compose(trunc, f);
        // comp[k] + g[k]*f[1]^k = 0
        Scalar f1k = boost::multiprecision::pow(f[1], static_cast<unsigned>(k));
        g[k] = -comp[k] / f1k;
    }
    return g;
}

Series derivative(const Series& a) {
    Series out(a.size(), Scalar(0));
    for (size_t k = 1; k < a.size(); ++k)
        out[k - 1] = a[k] * static_cast<long>(k);
    return out;
}

}  // namespace fac::taylor
