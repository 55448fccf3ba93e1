#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zz/dataset.hpp"

namespace zz {

enum class SmoothDensity { normal, laplace };

// Synthetic data: covariates x_i^j ~ (1-alpha) delta_0 + alpha rho, responses
// either from the logistic model at xi_true or a uniformly random subset of
// exactly k ones (independent of the covariates).
struct SynthSpec {
  int n = 0;
  int p = 0;
  double alpha = 1.0;  // nonzero probability, in (0, 1]
  SmoothDensity rho = SmoothDensity::normal;
  std::vector<double> xi_true;  // empty: random unit vector
  enum class ResponseMode { from_model, fixed_ones } response = ResponseMode::from_model;
  int fixed_k = 0;
};

// The coefficient vector generate() uses: spec.xi_true when given, otherwise
// a random unit vector from the seed's dedicated substream.
std::vector<double> resolve_xi_true(const SynthSpec& spec, std::uint64_t seed);

// Deterministic under a fixed seed; columns are filled from independent
// per-column substreams.
Dataset generate(const SynthSpec& spec, std::uint64_t seed);

// Covariate columns multiplied by per-column factors (responses unchanged).
Dataset scale_columns(const Dataset& data, std::span<const double> factors);

// Appends a dense all-ones column (never added implicitly; imbalanced
// responses only spread the posterior when the model carries an intercept).
Dataset add_intercept(const Dataset& data);

struct CsvOptions {
  std::string response_column = "y";
  bool impute_median = true;      // impute missing cells by column median
  bool add_missing_flags = false; // append a 0/1 indicator column per imputed column
  bool scale_unit_max = false;    // divide each column by its max |value|
  bool add_intercept = false;     // append a dense all-ones column
};

struct ColumnReport {
  std::string name;
  double zero_fraction = 0.0;
  int missing = 0;
  double imputed_value = 0.0;  // meaningful when missing > 0 and imputation ran
  double scale = 1.0;
  bool flagged_sparse = false;  // zero fraction above 0.5
};

struct IngestionReport {
  int n = 0;
  int p = 0;
  int positives = 0;
  std::string response_column;
  std::vector<ColumnReport> columns;
  std::string to_json() const;
};

// Comma-separated, header row, '.' decimal, UTF-8. Missing cells are empty,
// "NA" or "?". Throws std::runtime_error with row/column location on
// unparseable cells, a non-binary response, or an empty file.
Dataset load_csv(const std::string& path, const CsvOptions& options,
                 IngestionReport* report = nullptr);

// Header x1..xp,<response>; values at full precision so a reload reproduces
// the sparse structure exactly.
void save_csv(const Dataset& data, const std::string& path,
              const std::string& response_column = "y");

}  // namespace zz
