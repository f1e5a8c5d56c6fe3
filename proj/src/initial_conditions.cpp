#include "solitonscope/initial_conditions.hpp"

#include <cmath>
#include <set>

#include "solitonscope/error.hpp"
#include "solitonscope/soliton_profile.hpp"

namespace solitonscope {

namespace {

constexpr double kMinPointsPerWidth = 8.0;

const std::set<std::string, std::less<>>& required_keys(Recipe recipe) {
  static const std::set<std::string, std::less<>> soliton{"energy"};
  static const std::set<std::string, std::less<>> gaussian{"amplitude", "width", "b"};
  static const std::set<std::string, std::less<>> lens{"energy", "amplitude", "width", "b"};
  static const std::set<std::string, std::less<>> none{};
  switch (recipe) {
    case Recipe::exact_soliton: return soliton;
    case Recipe::gaussian_lens: return gaussian;
    case Recipe::lens_soliton: return lens;
    case Recipe::custom_samples: return none;
  }
  return none;
}

}  // namespace

void validate_recipe_params(Recipe recipe, const RecipeParams& params) {
  const auto& keys = required_keys(recipe);
  for (const auto& [k, v] : params) {
    if (!keys.contains(k))
      throw InvalidArgument("recipe " + std::string(recipe_name(recipe)) + ": unknown parameter '" + k + "'");
    if (!std::isfinite(v)) throw InvalidArgument("recipe parameter '" + k + "' is not finite");
  }
  for (const auto& k : keys)
    if (!params.contains(k))
      throw InvalidArgument("recipe " + std::string(recipe_name(recipe)) + ": missing parameter '" + k + "'");
  if (params.contains("energy") && !(params.find("energy")->second > 0.0))
    throw InvalidArgument("recipe: energy must be positive");
  if (params.contains("width") && !(params.find("width")->second > 0.0))
    throw InvalidArgument("recipe: width must be positive");
  if (params.contains("b") && params.find("b")->second < 0.0)
    throw InvalidArgument("recipe: focusing strength b must be >= 0");
  if (params.contains("amplitude") && params.find("amplitude")->second < 0.0)
    throw InvalidArgument("recipe: amplitude must be >= 0");
}

namespace {

void check_resolution(double width, const RadialGrid& grid) {
  if (width / grid.spacing() < kMinPointsPerWidth)
    throw InvalidArgument("recipe: width " + std::to_string(width) + " is resolved by fewer than 8 grid points");
}

double gauss(double r, double width) { return std::exp(-0.5 * r * r / (width * width)); }

}  // namespace

Recipe parse_recipe(std::string_view name) {
  if (name == "exact_soliton") return Recipe::exact_soliton;
  if (name == "lens_soliton") return Recipe::lens_soliton;
  if (name == "gaussian_lens") return Recipe::gaussian_lens;
  if (name == "custom_samples") return Recipe::custom_samples;
  throw InvalidArgument("unknown recipe '" + std::string(name) + "'");
}

std::string_view recipe_name(Recipe recipe) {
  switch (recipe) {
    case Recipe::exact_soliton: return "exact_soliton";
    case Recipe::lens_soliton: return "lens_soliton";
    case Recipe::gaussian_lens: return "gaussian_lens";
    case Recipe::custom_samples: return "custom_samples";
  }
  return "?";
}

WaveField make_initial_condition(Recipe recipe, const RecipeParams& params, const RadialGrid& grid,
                                 const NonlinearitySpec& nl) {
  if (recipe == Recipe::custom_samples)
    throw InvalidArgument("recipe custom_samples takes sample data, not parameters");
  validate_recipe_params(recipe, params);
  const auto get = [&](std::string_view k) { return params.find(k)->second; };

  std::vector<cplx> v(grid.size());
  if (recipe == Recipe::gaussian_lens) {
    const double a = get("amplitude"), w = get("width"), b = get("b");
    check_resolution(w, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double r = grid.node(k);
      v[k] = a * gauss(r, w) * std::exp(cplx(0.0, -b * r * r));
    }
  } else {
    const double e = get("energy");
    check_resolution(1.0 / std::sqrt(e), grid);
    const auto profile = solve_profile(e, nl, grid);
    double a = 0.0, w = 1.0, b = 0.0;
    if (recipe == Recipe::lens_soliton) {
      a = get("amplitude") * profile.u0();
      w = get("width");
      b = get("b");
      check_resolution(w, grid);
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double r = grid.node(k);
      v[k] = (profile.u[k] + a * gauss(r, w)) * std::exp(cplx(0.0, -b * r * r));
    }
  }
  // The radial solver pins psi(R_max) = 0; start from data that agrees.
  if (!grid.is_line()) v.back() = 0.0;
  WaveField field(grid, std::move(v), 0.0);
  if (!field.all_finite()) throw InvalidArgument("recipe produced non-finite samples");
  return field;
}

WaveField from_samples(const RadialGrid& grid, std::span<const cplx> samples) {
  if (samples.size() != grid.size()) throw InvalidArgument("custom_samples: length does not match grid");
  WaveField field(grid, std::vector<cplx>(samples.begin(), samples.end()), 0.0);
  if (!field.all_finite()) throw InvalidArgument("custom_samples: non-finite sample");
  return field;
}

}  // namespace solitonscope
