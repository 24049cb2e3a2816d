#include "kanmixer/basis.hpp"

#include <algorithm>
#include <cmath>

namespace kanmixer {

namespace {
constexpr double kPi = 3.14159265358979323846;
// Mexican-hat normalization 2 / (sqrt(3) * pi^(1/4)).
const double kMexicanHatC = 2.0 / (std::sqrt(3.0) * std::pow(kPi, 0.25));
}  // namespace

BSplineGrid BSplineGrid::make(int degree, int grid_size, double lo, double hi) {
    if (degree < 0) throw config_error("bspline degree must be >= 0");
    if (grid_size < 1) throw config_error("bspline grid_size must be >= 1");
    if (!(hi > lo)) throw config_error("bspline domain must satisfy hi > lo");
    BSplineGrid g;
    g.degree = degree;
    g.grid_size = grid_size;
    g.lo = lo;
    g.hi = hi;
    const double h = (hi - lo) / grid_size;
    const int n_knots = grid_size + 2 * degree + 1;
    g.knots.resize(n_knots);
    for (int i = 0; i < n_knots; ++i) g.knots[i] = lo + (i - degree) * h;
    return g;
}

std::vector<double> bspline_basis(double x, const BSplineGrid& grid) {
    const int p = grid.degree;
    const int G = grid.grid_size;
    x = std::clamp(x, grid.lo, grid.hi);

    // Span index s such that knots[s] <= x < knots[s+1], clamped to the
    // interior so x == hi lands in the last interval.
    const double h = grid.spacing();
    int interval = static_cast<int>((x - grid.lo) / h);
    interval = std::clamp(interval, 0, G - 1);
    const int s = p + interval;

    // Triangular Cox-de Boor scheme: the p+1 nonzero functions at x.
    std::vector<double> nz(p + 1, 0.0), left(p + 1), right(p + 1);
    nz[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - grid.knots[s + 1 - j];
        right[j] = grid.knots[s + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = nz[r] / (right[r + 1] + left[j - r]);
            nz[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        nz[j] = saved;
    }

    std::vector<double> out(G + p, 0.0);
    for (int i = 0; i <= p; ++i) out[s - p + i] = nz[i];
    return out;
}

std::vector<double> bspline_basis_deriv(double x, const BSplineGrid& grid) {
    const int p = grid.degree;
    const int G = grid.grid_size;
    std::vector<double> out(G + p, 0.0);
    if (x < grid.lo || x > grid.hi) return out;  // clamped input: flat
    if (p == 0) return out;

    // N'_{i,p} = p * (N_{i,p-1} - N_{i+1,p-1}) / (p*h) on a uniform grid.
    BSplineGrid lower = grid;
    lower.degree = p - 1;
    lower.knots.assign(grid.knots.begin() + 1, grid.knots.end() - 1);
    lower.grid_size = G;
    const std::vector<double> nl = bspline_basis(x, lower);  // G + p - 1 values
    const double denom = p * grid.spacing();
    for (int i = 0; i < G + p; ++i) {
        const double a = (i - 1 >= 0 && i - 1 < G + p - 1) ? nl[i - 1] : 0.0;
        const double b = (i < G + p - 1) ? nl[i] : 0.0;
        out[i] = p * (a - b) / denom;
    }
    return out;
}

std::vector<double> chebyshev_basis(double x, int degree) {
    const double u = std::tanh(x);
    std::vector<double> t(degree + 1);
    t[0] = 1.0;
    if (degree >= 1) t[1] = u;
    for (int n = 2; n <= degree; ++n) t[n] = 2.0 * u * t[n - 1] - t[n - 2];
    return t;
}

std::vector<double> chebyshev_basis_deriv(double x, int degree) {
    const double u = std::tanh(x);
    const double du = 1.0 - u * u;  // d tanh/dx
    // T'_n(u) = n * U_{n-1}(u) with U the second-kind recurrence.
    std::vector<double> out(degree + 1, 0.0);
    double um1 = 1.0;       // U_0
    double um2 = 0.0;       // U_{-1}
    for (int n = 1; n <= degree; ++n) {
        out[n] = n * um1 * du;
        const double next = 2.0 * u * um1 - um2;
        um2 = um1;
        um1 = next;
    }
    return out;
}

std::vector<double> fourier_basis(double x, int k) {
    std::vector<double> out(2 * k + 1);
    out[0] = 1.0;
    for (int f = 1; f <= k; ++f) {
        out[2 * f - 1] = std::sin(f * x);
        out[2 * f] = std::cos(f * x);
    }
    return out;
}

std::vector<double> fourier_basis_deriv(double x, int k) {
    std::vector<double> out(2 * k + 1);
    out[0] = 0.0;
    for (int f = 1; f <= k; ++f) {
        out[2 * f - 1] = f * std::cos(f * x);
        out[2 * f] = -f * std::sin(f * x);
    }
    return out;
}

std::vector<double> wavelet_basis(double x, const std::vector<double>& scales,
                                  const std::vector<double>& translations) {
    std::vector<double> out;
    out.reserve(scales.size() * translations.size());
    for (double s : scales) {
        if (s <= 0.0) throw config_error("wavelet scale must be positive");
        const double inv_sqrt_s = 1.0 / std::sqrt(s);
        for (double t : translations) {
            const double u = (x - t) / s;
            out.push_back(inv_sqrt_s * kMexicanHatC * (1.0 - u * u) * std::exp(-0.5 * u * u));
        }
    }
    return out;
}

std::vector<double> wavelet_basis_deriv(double x, const std::vector<double>& scales,
                                        const std::vector<double>& translations) {
    std::vector<double> out;
    out.reserve(scales.size() * translations.size());
    for (double s : scales) {
        if (s <= 0.0) throw config_error("wavelet scale must be positive");
        const double c = 1.0 / (s * std::sqrt(s));
        for (double t : translations) {
            const double u = (x - t) / s;
            // d/du of the mother wavelet is C * u * (u^2 - 3) * exp(-u^2/2).
            out.push_back(c * kMexicanHatC * u * (u * u - 3.0) * std::exp(-0.5 * u * u));
        }
    }
    return out;
}

std::string to_string(BasisKind k) {
    switch (k) {
        case BasisKind::bspline: return "bspline";
        case BasisKind::chebyshev: return "chebyshev";
        case BasisKind::fourier: return "fourier";
        case BasisKind::wavelet: return "wavelet";
    }
    return "bspline";
}

BasisKind basis_kind_from_string(const std::string& s) {
    if (s == "bspline") return BasisKind::bspline;
    if (s == "chebyshev") return BasisKind::chebyshev;
    if (s == "fourier") return BasisKind::fourier;
    if (s == "wavelet") return BasisKind::wavelet;
    throw config_error("unknown basis kind '" + s + "'");
}

BasisSpec BasisSpec::make(BasisKind kind) {
    BasisSpec spec;
    spec.kind = kind;
    return spec;
}

int BasisSpec::num_functions() const {
    switch (kind) {
        case BasisKind::bspline: return grid.num_functions();
        case BasisKind::chebyshev: return cheb_degree + 1;
        case BasisKind::fourier: return 2 * fourier_k + 1;
        case BasisKind::wavelet: return static_cast<int>(scales.size() * translations.size());
    }
    return 0;
}

void BasisSpec::validate() const {
    if (num_functions() <= 0) throw config_error("basis has no functions");
    if (kind == BasisKind::wavelet) {
        for (double s : scales)
            if (s <= 0.0) throw config_error("wavelet scale must be positive");
        if (translations.empty()) throw config_error("wavelet needs at least one translation");
    }
    if (kind == BasisKind::chebyshev && cheb_degree < 0)
        throw config_error("chebyshev degree must be >= 0");
    if (kind == BasisKind::fourier && fourier_k < 1)
        throw config_error("fourier frequency count must be >= 1");
}

void BasisSpec::eval(double x, double* out) const {
    std::vector<double> v;
    switch (kind) {
        case BasisKind::bspline: v = bspline_basis(x, grid); break;
        case BasisKind::chebyshev: v = chebyshev_basis(x, cheb_degree); break;
        case BasisKind::fourier: v = fourier_basis(x, fourier_k); break;
        case BasisKind::wavelet: v = wavelet_basis(x, scales, translations); break;
    }
    std::copy(v.begin(), v.end(), out);
}

void BasisSpec::deriv(double x, double* out) const {
    std::vector<double> v;
    switch (kind) {
        case BasisKind::bspline: v = bspline_basis_deriv(x, grid); break;
        case BasisKind::chebyshev: v = chebyshev_basis_deriv(x, cheb_degree); break;
        case BasisKind::fourier: v = fourier_basis_deriv(x, fourier_k); break;
        case BasisKind::wavelet: v = wavelet_basis_deriv(x, scales, translations); break;
    }
    std::copy(v.begin(), v.end(), out);
}

}  // namespace kanmixer
