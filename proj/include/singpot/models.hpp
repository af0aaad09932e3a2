#pragma once

#include "singpot/entropy.hpp"
#include "singpot/model.hpp"

#include <string>
#include <vector>

namespace singpot {

/// McMillan (S, sigma) model in reduced coordinates (theta, x):
///   a1 = P2(cos theta), a2 = P2(cos theta) cos(2 pi x),
/// measure 2 pi sin(theta) dtheta dx. Q = {S in (-1/2, 1), |sigma| < (S+2)/3}
/// is attached in closed form.
Model mcmillan_model(int n_theta = 48, int n_x = 48, EntropyPtr entropy = shannon());

/// One polynomial constraint sum_i c_i x^i (ascending coefficients) on
/// [-1, 1] with dx/2. Q = (min a, max a) is attached.
Model polynomial_interval_model(std::string name, std::vector<double> coefficients, int order = 64,
                                EntropyPtr entropy = shannon());

/// The four discriminant examples: x; x^4-7x^3-2x^2+3x+7/15; 7x^3-x^2+x+1/3; x^3.
std::vector<Model> table_models(int order = 64);
/// 1-based index into table_models.
Model table_model(int index, int order = 64);

/// X = S^2 with surface measure (mu = 4 pi), a_i(p) = p_i.
Model sphere_chain_model(int n_quad = 32, EntropyPtr entropy = shannon());

/// X = [0, 2 pi) with dt/(2 pi), a = (cos t, sin t).
Model circle_phase_model(int n = 128, EntropyPtr entropy = shannon());

/// Orthonormal 1-D model a = sqrt(3) x on [-1, 1] with dx/2.
Model interval_orthonormal_model(int order = 64, EntropyPtr entropy = shannon());

/// mcmillan | table1..table4 | sphere-chain | circle-phase | interval-orthonormal.
/// `resolution` <= 0 keeps the default quadrature size.
Model builtin_model(const std::string& name, int resolution = 0);

std::vector<std::string> builtin_names();

}  // namespace singpot
