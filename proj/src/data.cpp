#include "zz/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "zz/model.hpp"
#include "zz/rng.hpp"

namespace zz {

static void validate_spec(const SynthSpec& spec) {
  if (spec.n < 1 || spec.p < 1) throw std::invalid_argument("synth: empty shape");
  if (!(spec.alpha > 0.0) || spec.alpha > 1.0)
    throw std::invalid_argument("synth: alpha must be in (0, 1]");
  if (!spec.xi_true.empty() && spec.xi_true.size() != static_cast<std::size_t>(spec.p))
    throw std::invalid_argument("synth: xi_true dimension mismatch");
  if (spec.response == SynthSpec::ResponseMode::fixed_ones &&
      (spec.fixed_k < 0 || spec.fixed_k > spec.n))
    throw std::invalid_argument("synth: fixed_ones count out of range");
}

std::vector<double> resolve_xi_true(const SynthSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  if (!spec.xi_true.empty()) return spec.xi_true;
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(spec.p) + 1));
  std::vector<double> xi(static_cast<std::size_t>(spec.p));
  double norm = 0.0;
  for (double& v : xi) {
    v = rng.normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    xi[0] = 1.0;
    return xi;
  }
  for (double& v : xi) v /= norm;
  return xi;
}

Dataset generate(const SynthSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  const std::vector<double> xi = resolve_xi_true(spec, seed);

  // columns from independent substreams (stream i for column i)
  std::vector<std::vector<SparseEntry>> cols(static_cast<std::size_t>(spec.p));
  std::vector<double> logits(static_cast<std::size_t>(spec.n), 0.0);
  for (int i = 0; i < spec.p; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    auto& col = cols[static_cast<std::size_t>(i)];
    for (int j = 0; j < spec.n; ++j) {
      if (rng.uniform() >= spec.alpha) continue;
      const double v = spec.rho == SmoothDensity::normal ? rng.normal() : rng.laplace();
      if (v == 0.0) continue;
      col.push_back({j, v});
      logits[static_cast<std::size_t>(j)] += v * xi[static_cast<std::size_t>(i)];
    }
  }

  std::vector<int> y(static_cast<std::size_t>(spec.n), 0);
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(spec.p)));
  if (spec.response == SynthSpec::ResponseMode::from_model) {
    for (int j = 0; j < spec.n; ++j)
      y[static_cast<std::size_t>(j)] =
          rng.uniform() < sigmoid(logits[static_cast<std::size_t>(j)]) ? 1 : 0;
  } else {
    // exactly k ones, uniformly random subset, independent of the covariates
    std::vector<int> idx(static_cast<std::size_t>(spec.n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int t = 0; t < spec.fixed_k; ++t) {
      const std::size_t r =
          static_cast<std::size_t>(t) +
          rng.below(static_cast<std::uint64_t>(spec.n - t));
      std::swap(idx[static_cast<std::size_t>(t)], idx[r]);
      y[static_cast<std::size_t>(idx[static_cast<std::size_t>(t)])] = 1;
    }
  }
  return Dataset::from_columns(spec.n, spec.p, std::move(cols), std::move(y));
}

Dataset scale_columns(const Dataset& data, std::span<const double> factors) {
  if (factors.size() != static_cast<std::size_t>(data.p()))
    throw std::invalid_argument("scale_columns: factor count mismatch");
  std::vector<std::vector<SparseEntry>> cols(static_cast<std::size_t>(data.p()));
  for (int i = 0; i < data.p(); ++i) {
    const double f = factors[static_cast<std::size_t>(i)];
    if (!std::isfinite(f)) throw std::invalid_argument("scale_columns: non-finite factor");
    for (const SparseEntry& e : data.column(i)) {
      const double v = e.value * f;
      if (v != 0.0) cols[static_cast<std::size_t>(i)].push_back({e.index, v});
    }
  }
  return Dataset::from_columns(data.n(), data.p(), std::move(cols), data.responses());
}

Dataset add_intercept(const Dataset& data) {
  std::vector<std::vector<SparseEntry>> cols;
  cols.reserve(static_cast<std::size_t>(data.p()) + 1);
  for (int i = 0; i < data.p(); ++i) cols.push_back(data.column(i));
  std::vector<SparseEntry> ones;
  ones.reserve(static_cast<std::size_t>(data.n()));
  for (int j = 0; j < data.n(); ++j) ones.push_back({j, 1.0});
  cols.push_back(std::move(ones));
  return Dataset::from_columns(data.n(), data.p() + 1, std::move(cols),
                               data.responses());
}

// ---- CSV ----

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "?";
}

double parse_cell(const std::string& cell, int row, const std::string& col) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw std::runtime_error("csv: unparseable cell '" + cell + "' at row " +
                             std::to_string(row) + ", column " + col);
  return v;
}

double column_median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& options,
                 IngestionReport* report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path);

  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);
  int response_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == options.response_column) {
      response_idx = static_cast<int>(i);
      break;
    }
  }
  if (response_idx < 0)
    throw std::runtime_error("csv: response column '" + options.response_column +
                             "' not found in " + path);

  const int raw_p = static_cast<int>(header.size()) - 1;
  if (raw_p < 1) throw std::runtime_error("csv: no predictor columns in " + path);

  std::vector<std::string> names;  // predictor names in file order
  for (std::size_t i = 0; i < header.size(); ++i)
    if (static_cast<int>(i) != response_idx) names.push_back(header[i]);

  // cells[i][j]: NaN marks a missing value
  std::vector<std::vector<double>> cells(static_cast<std::size_t>(raw_p));
  std::vector<int> y;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("csv: row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
    int pi = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string cell = trim(fields[i]);
      if (static_cast<int>(i) == response_idx) {
        if (is_missing(cell))
          throw std::runtime_error("csv: missing response at row " + std::to_string(row));
        const double v = parse_cell(cell, row, options.response_column);
        if (v != 0.0 && v != 1.0)
          throw std::runtime_error("csv: non-binary response '" + cell + "' at row " +
                                   std::to_string(row));
        y.push_back(static_cast<int>(v));
      } else {
        double v;
        if (is_missing(cell))
          v = std::numeric_limits<double>::quiet_NaN();
        else
          v = parse_cell(cell, row, names[static_cast<std::size_t>(pi)]);
        cells[static_cast<std::size_t>(pi)].push_back(v);
        ++pi;
      }
    }
  }
  const int n = static_cast<int>(y.size());
  if (n == 0) throw std::runtime_error("csv: no data rows in " + path);

  IngestionReport rep;
  rep.response_column = options.response_column;
  rep.positives = static_cast<int>(std::count(y.begin(), y.end(), 1));

  std::vector<std::vector<double>> out_cols;
  std::vector<ColumnReport> col_reports;
  std::vector<std::vector<double>> flag_cols;
  std::vector<std::string> flag_names;

  for (int i = 0; i < raw_p; ++i) {
    auto& col = cells[static_cast<std::size_t>(i)];
    ColumnReport cr;
    cr.name = names[static_cast<std::size_t>(i)];
    std::vector<double> present;
    for (double v : col)
      if (!std::isnan(v)) present.push_back(v);
    cr.missing = n - static_cast<int>(present.size());
    if (cr.missing > 0) {
      if (!options.impute_median)
        throw std::runtime_error("csv: column " + cr.name + " has " +
                                 std::to_string(cr.missing) +
                                 " missing values and imputation is disabled");
      if (present.empty())
        throw std::runtime_error("csv: column " + cr.name + " is entirely missing");
      cr.imputed_value = column_median(present);
      if (options.add_missing_flags) {
        std::vector<double> flags(col.size());
        for (std::size_t j = 0; j < col.size(); ++j)
          flags[j] = std::isnan(col[j]) ? 1.0 : 0.0;
        flag_cols.push_back(std::move(flags));
        flag_names.push_back(cr.name + "_missing");
      }
      for (double& v : col)
        if (std::isnan(v)) v = cr.imputed_value;
    }
    if (options.scale_unit_max) {
      double max_abs = 0.0;
      for (double v : col) max_abs = std::max(max_abs, std::fabs(v));
      if (max_abs > 0.0) {
        cr.scale = 1.0 / max_abs;
        for (double& v : col) v *= cr.scale;
      }
    }
    int zeros = 0;
    for (double v : col)
      if (v == 0.0) ++zeros;
    cr.zero_fraction = static_cast<double>(zeros) / static_cast<double>(n);
    cr.flagged_sparse = cr.zero_fraction > 0.5;
    col_reports.push_back(cr);
    out_cols.push_back(std::move(col));
  }

  for (std::size_t f = 0; f < flag_cols.size(); ++f) {
    ColumnReport cr;
    cr.name = flag_names[f];
    int zeros = 0;
    for (double v : flag_cols[f])
      if (v == 0.0) ++zeros;
    cr.zero_fraction = static_cast<double>(zeros) / static_cast<double>(n);
    cr.flagged_sparse = cr.zero_fraction > 0.5;
    col_reports.push_back(cr);
    out_cols.push_back(std::move(flag_cols[f]));
  }
  if (options.add_intercept) {
    ColumnReport cr;
    cr.name = "intercept";
    out_cols.emplace_back(static_cast<std::size_t>(n), 1.0);
    col_reports.push_back(cr);
  }

  const int p = static_cast<int>(out_cols.size());
  std::vector<std::vector<SparseEntry>> sparse(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = out_cols[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (v != 0.0) sparse[static_cast<std::size_t>(i)].push_back({j, v});
    }
  }

  rep.n = n;
  rep.p = p;
  rep.columns = std::move(col_reports);
  if (report != nullptr) *report = rep;
  return Dataset::from_columns(n, p, std::move(sparse), std::move(y));
}

std::string IngestionReport::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["p"] = p;
  j["positives"] = positives;
  j["response_column"] = response_column;
  j["response_imbalance"] = n > 0 ? static_cast<double>(positives) / n : 0.0;
  nlohmann::ordered_json cols = nlohmann::ordered_json::array();
  for (const ColumnReport& c : columns) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["zero_fraction"] = c.zero_fraction;
    jc["missing"] = c.missing;
    if (c.missing > 0) jc["imputed_value"] = c.imputed_value;
    jc["scale"] = c.scale;
    jc["flagged_sparse"] = c.flagged_sparse;
    cols.push_back(jc);
  }
  j["columns"] = cols;
  return j.dump(2);
}

void save_csv(const Dataset& data, const std::string& path,
              const std::string& response_column) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write " + path);
  for (int i = 0; i < data.p(); ++i) out << "x" << (i + 1) << ",";
  out << response_column << "\n";
  char buf[40];
  for (int j = 0; j < data.n(); ++j) {
    for (int i = 0; i < data.p(); ++i) {
      const double v = data.value_at(j, i);
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ",";
    }
    out << data.response(j) << "\n";
  }
}

}  // namespace zz
