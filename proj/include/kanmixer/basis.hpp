#ifndef KANMIXER_BASIS_HPP_
#define KANMIXER_BASIS_HPP_

#include <string>
#include <vector>

#include "kanmixer/errors.hpp"

namespace kanmixer {

// Uniform B-spline knot grid on [lo, hi] with `grid_size` interior intervals,
// extended `degree` intervals beyond each end. Supports G + p basis functions.
struct BSplineGrid {
    int degree = 3;
    int grid_size = 5;
    double lo = -1.0;
    double hi = 1.0;
    std::vector<double> knots;  // G + 2p + 1 uniformly spaced values

    static BSplineGrid make(int degree, int grid_size, double lo = -1.0, double hi = 1.0);

    int num_functions() const { return grid_size + degree; }
    double spacing() const { return (hi - lo) / grid_size; }
};

enum class BasisKind { bspline, chebyshev, fourier, wavelet };

std::string to_string(BasisKind k);
BasisKind basis_kind_from_string(const std::string& s);

// Parameterization of one of the four basis families. Out-of-the-box values
// follow the conventions of the KAN variants each family comes from.
struct BasisSpec {
    BasisKind kind = BasisKind::bspline;
    BSplineGrid grid = BSplineGrid::make(3, 5);
    int cheb_degree = 4;
    int fourier_k = 4;
    std::vector<double> scales = {0.5, 1.0, 2.0};
    std::vector<double> translations = {-1.0, -0.5, 0.0, 0.5, 1.0};

    static BasisSpec make(BasisKind kind);

    int num_functions() const;

    // Evaluate all basis functions at x into out[0 .. num_functions).
    void eval(double x, double* out) const;

    // Exact d/dx of each basis function at x.
    void deriv(double x, double* out) const;

    void validate() const;
};

// B-spline basis values via the Cox-de Boor triangular recursion. x is clamped
// to [lo, hi]; at most degree+1 entries of the result are nonzero and the
// vector sums to 1 on the domain.
std::vector<double> bspline_basis(double x, const BSplineGrid& grid);
std::vector<double> bspline_basis_deriv(double x, const BSplineGrid& grid);

// Chebyshev polynomials T_0..T_D at u = tanh(x); the squash keeps the
// recurrence inside its stable range.
std::vector<double> chebyshev_basis(double x, int degree);
std::vector<double> chebyshev_basis_deriv(double x, int degree);

// [1, sin(x), cos(x), ..., sin(Kx), cos(Kx)] with integer frequencies.
std::vector<double> fourier_basis(double x, int k);
std::vector<double> fourier_basis_deriv(double x, int k);

// Mexican-hat wavelets psi((x - t)/s)/sqrt(s) for every (scale, translation).
std::vector<double> wavelet_basis(double x, const std::vector<double>& scales,
                                  const std::vector<double>& translations);
std::vector<double> wavelet_basis_deriv(double x, const std::vector<double>& scales,
                                        const std::vector<double>& translations);

}  // namespace kanmixer

#endif  // KANMIXER_BASIS_HPP_
