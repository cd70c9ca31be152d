#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "tubespec/charbasis.hpp"
#include "tubespec/model.hpp"

namespace tubespec {

struct BoundaryForm {
    int endpoint = 0;
    Eigen::Vector4cd coeffs0 = Eigen::Vector4cd::Zero();  // weights on (w, w', w'', w''')
    Eigen::Vector4cd coeffs1 = Eigen::Vector4cd::Zero();  // weights multiplied by lambda

    Eigen::RowVector4cd at(cplx lambda) const { return (coeffs0 + lambda * coeffs1).transpose(); }
};

std::array<BoundaryForm, 4> boundary_rows(cplx lambda, const ProblemSpec& spec);

enum class DetRoute { MatrixExponential, ExponentialBasis };

// Delta(lambda) = value * exp(logscale); Delta is normalised so that it is analytic in lambda
// (the exponential-basis determinant divided by the Vandermonde determinant of the exponents).
struct CharDetValue {
    cplx value;
    double logscale = 0;
    double relative = 0;  // |det| of the row-normalised matrix over its Hadamard bound
    DetRoute route = DetRoute::MatrixExponential;
    bool degenerate = false;  // evaluated at a perturbed lambda
    cplx lambda_used;
};

// Largest |Re mu| for which the transfer-matrix route is used.
inline constexpr double kMatrixRouteReMu = 5.0;

CharDetValue char_det(cplx lambda, const ProblemSpec& spec);

// Central difference of Delta expressed in the logscale of char_det(lambda).
cplx char_det_derivative(cplx lambda, const ProblemSpec& spec, double h = 0);

// Newton correction Delta / Delta'.
cplx newton_step(cplx lambda, const ProblemSpec& spec);

struct EigenfunctionSample {
    Eigen::Vector4cd a;  // basis coefficients (exponential route) or Cauchy data at s = 0 (matrix route)
    DetRoute route;
    std::vector<double> grid;
    std::vector<cplx> w_values;
    double residual;                       // sigma_min / sigma_max of the row-normalised boundary matrix
    Eigen::Vector4cd endpoint0, endpoint1;  // (w, w', w'', w''') after normalisation
    double bc_residual;
};

// Null vector of the boundary matrix at lambda_star, sampled on a uniform grid of grid_size points
// (or on the given grid) and scaled so that the largest sample is real and positive.
EigenfunctionSample eigenfunction(cplx lambda_star, const ProblemSpec& spec, int grid_size, double tolerance = 1e-6);
EigenfunctionSample eigenfunction(cplx lambda_star, const ProblemSpec& spec, const std::vector<double>& grid,
                                  double tolerance = 1e-6);

}  // namespace tubespec
