#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>

#include "solitonscope/nonlinearity.hpp"
#include "solitonscope/wave_field.hpp"

namespace solitonscope {

enum class Recipe { exact_soliton, lens_soliton, gaussian_lens, custom_samples };

Recipe parse_recipe(std::string_view name);
std::string_view recipe_name(Recipe recipe);

using RecipeParams = std::map<std::string, double, std::less<>>;

/// Initial data psi_0 on a grid.
///
///   exact_soliton  energy                      u_E(r)
///   gaussian_lens  amplitude, width, b         A exp(-r^2 / (2 w^2)) exp(-i b r^2)
///   lens_soliton   energy, amplitude, width, b (u_E(r) + A u_E(0) exp(-r^2 / (2 w^2))) exp(-i b r^2)
///
/// The lens phase makes the current -2 b r rho, i.e. incoming for b > 0.
/// custom_samples carries no parameters; use from_samples(). Widths must be
/// resolved by at least 8 grid points.
WaveField make_initial_condition(Recipe recipe, const RecipeParams& params, const RadialGrid& grid,
                                 const NonlinearitySpec& nl = NonlinearitySpec::cubic_focusing());

/// Checks parameter names and ranges of a recipe without sampling it.
void validate_recipe_params(Recipe recipe, const RecipeParams& params);

/// custom_samples: copies user data after checking length and finiteness.
WaveField from_samples(const RadialGrid& grid, std::span<const cplx> samples);

}  // namespace solitonscope
