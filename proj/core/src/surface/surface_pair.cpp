#include "bifid/surface/surface_pair.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "bifid/errors.hpp"
#include "bifid/random.hpp"

namespace bifid::surface {

namespace {

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::optional<double> spearman_of(const Vector& a, const Vector& b) {
  return spearman(as_span(a), as_span(b));
}

std::vector<Index> sample_rows(Index total, std::size_t count, std::mt19937_64& rng) {
  std::vector<Index> rows(static_cast<std::size_t>(total));
  std::iota(rows.begin(), rows.end(), Index{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
    std::swap(rows[i], rows[pick(rng)]);
  }
  rows.resize(count);
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p += ".json";
  return p;
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::GpSampled:
      return "gp_sampled";
    case Provenance::TrigFixture:
      return "trig_fixture";
    case Provenance::Analytic:
      return "analytic";
  }
  return "gp_sampled";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "gp_sampled") return Provenance::GpSampled;
  if (s == "trig_fixture") return Provenance::TrigFixture;
  if (s == "analytic") return Provenance::Analytic;
  throw ArgumentError("unknown provenance '" + s + "'");
}

void SurfacePair::validate() const {
  if (y_cheap.size() != domain.rows() || y_exp.size() != domain.rows()) {
    throw ArgumentError("surface pair: field lengths differ from the domain size");
  }
  const auto r = spearman_of(y_cheap, y_exp);
  if (!r || std::abs(*r - spearman) > 1e-12) {
    throw ArgumentError("surface pair: stored Spearman coefficient does not match the fields");
  }
}

SurfacePair make_surface_pair(Matrix domain, Vector y_cheap, Vector y_exp, Provenance provenance,
                              nlohmann::json meta) {
  if (y_cheap.size() != domain.rows() || y_exp.size() != domain.rows()) {
    throw ArgumentError("surface pair: field lengths differ from the domain size");
  }
  const auto r = spearman_of(y_cheap, y_exp);
  if (!r) throw ArgumentError("surface pair: Spearman coefficient is undefined (constant field)");
  SurfacePair p;
  p.domain = std::move(domain);
  p.y_cheap = std::move(y_cheap);
  p.y_exp = std::move(y_exp);
  p.spearman = *r;
  p.provenance = provenance;
  p.meta = std::move(meta);
  return p;
}

SurfacePair gp_sample_pair(const DomainSpec& domain, const RbfKernel& kernel, std::size_t n_train,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto exp = gp_sample_surface(domain, kernel, n_train, rng);
  auto cheap = gp_sample_surface(domain, kernel, n_train, rng);
  nlohmann::json meta = {{"seed", seed},
                         {"variance", kernel.variance},
                         {"lengthscale", kernel.lengthscale},
                         {"n_train", n_train}};
  return make_surface_pair(domain.points(), std::move(cheap.values), std::move(exp.values),
                           Provenance::GpSampled, std::move(meta));
}

Matrix unit_grid(int dim, int points_per_dim) {
  return DomainSpec{dim, points_per_dim, 0.0, 1.0}.points();
}

SurfacePair trig_surface_pair(TrigKind kind, int n_points) {
  const Matrix x = unit_grid(1, n_points);
  const auto t = trig_pair(kind);
  Vector yc(x.rows());
  Vector ye(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    yc[i] = t.cheap(x(i, 0));
    ye[i] = t.expensive(x(i, 0));
  }
  return make_surface_pair(x, std::move(yc), std::move(ye), Provenance::TrigFixture,
                           {{"kind", to_string(kind)}});
}

SurfacePair analytic_surface_pair(AnalyticName cheap, AnalyticName expensive, int dim,
                                  int points_per_dim) {
  const Matrix x = unit_grid(dim, points_per_dim);
  const AnalyticSurface fc(cheap, dim);
  const AnalyticSurface fe(expensive, dim);
  Vector yc(x.rows());
  Vector ye(x.rows());
  std::vector<double> row(static_cast<std::size_t>(dim));
  for (Index i = 0; i < x.rows(); ++i) {
    for (int k = 0; k < dim; ++k) row[static_cast<std::size_t>(k)] = x(i, k);
    yc[i] = fc(row);
    ye[i] = fe(row);
  }
  return make_surface_pair(x, std::move(yc), std::move(ye), Provenance::Analytic,
                           {{"cheap", to_string(cheap)}, {"expensive", to_string(expensive)}});
}

std::vector<BinnedPool::Entry> generate_bin_cells(const PoolSpec& spec, int expensive_index,
                                                  std::uint64_t seed,
                                                  std::vector<std::string>* warnings) {
  for (int b : spec.bins) {
    if (b < 0 || b >= kCorrelationBins) throw ArgumentError("pool: bin index out of range");
  }
  if (spec.max_attempts < 1) throw ArgumentError("pool: max_attempts must be >= 1");
  auto rng = stream_rng(seed, {static_cast<std::uint64_t>(expensive_index)});
  const Matrix x = spec.domain.points();
  const auto exp = gp_sample_surface(spec.domain, spec.kernel, spec.n_train, rng);

  std::vector<int> wanted = spec.bins;
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  std::vector<std::optional<BinnedPool::Entry>> filled(kCorrelationBins);
  std::size_t remaining = wanted.size();
  // Every cheap draw may fill whichever requested bin it lands in; the budget
  // is max_attempts per requested bin.
  const long budget = static_cast<long>(spec.max_attempts) * static_cast<long>(wanted.size());
  for (long attempt = 0; attempt < budget && remaining > 0; ++attempt) {
    auto cheap = gp_sample_surface(spec.domain, spec.kernel, spec.n_train, rng);
    const auto r = spearman_of(cheap.values, exp.values);
    if (!r) continue;
    const int bin = correlation_bin(*r);
    if (!std::binary_search(wanted.begin(), wanted.end(), bin) || filled[static_cast<std::size_t>(bin)]) continue;
    nlohmann::json meta = {{"seed", seed},
                           {"expensive_index", expensive_index},
                           {"attempt", attempt},
                           {"bin", bin_label(bin)},
                           {"variance", spec.kernel.variance},
                           {"lengthscale", spec.kernel.lengthscale},
                           {"n_train", spec.n_train}};
    BinnedPool::Entry e{make_surface_pair(x, std::move(cheap.values), exp.values,
                                          Provenance::GpSampled, std::move(meta)),
                        bin, expensive_index};
    filled[static_cast<std::size_t>(bin)] = std::move(e);
    --remaining;
  }
  std::vector<BinnedPool::Entry> out;
  for (int b : wanted) {
    if (filled[static_cast<std::size_t>(b)]) {
      out.push_back(std::move(*filled[static_cast<std::size_t>(b)]));
    } else {
      const std::string msg = "expensive surface " + std::to_string(expensive_index) + ": bin " +
                              bin_label(b) + " not reached after " +
                              std::to_string(spec.max_attempts) + " attempts per bin";
      spdlog::warn("{}", msg);
      if (warnings) warnings->push_back(msg);
    }
  }
  return out;
}

BinnedPool generate_binned_pool(const PoolSpec& spec, std::uint64_t seed) {
  BinnedPool pool;
  for (int i = 0; i < spec.n_expensive; ++i) {
    auto cells = generate_bin_cells(spec, i, seed, &pool.warnings);
    for (auto& c : cells) pool.entries.push_back(std::move(c));
  }
  return pool;
}

std::vector<Fold> make_folds(const SurfacePair& pair, int n_folds, std::size_t n_cheap_train,
                             std::size_t n_exp_train, std::uint64_t seed) {
  const auto total = static_cast<std::size_t>(pair.size());
  if (n_folds < 1) throw ArgumentError("make_folds: n_folds must be >= 1");
  if (n_cheap_train > total) throw ArgumentError("make_folds: cheap training size exceeds the domain");
  if (n_exp_train > total) throw ArgumentError("make_folds: expensive training size exceeds the domain");
  if (n_exp_train == total) throw ArgumentError("make_folds: validation set would be empty");
  std::vector<Fold> folds;
  folds.reserve(static_cast<std::size_t>(n_folds));
  for (int f = 0; f < n_folds; ++f) {
    auto rng = stream_rng(seed, {static_cast<std::uint64_t>(f)});
    Fold fold;
    fold.exp_train = sample_rows(pair.size(), n_exp_train, rng);
    fold.cheap_train = sample_rows(pair.size(), n_cheap_train, rng);
    for (Index i = 0, j = 0; i < pair.size(); ++i) {
      if (j < static_cast<Index>(fold.exp_train.size()) && fold.exp_train[static_cast<std::size_t>(j)] == i) {
        ++j;
      } else {
        fold.validation.push_back(i);
      }
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

model::Dataset fold_dataset(const SurfacePair& pair, const Fold& fold) {
  model::Dataset d(pair.dim());
  std::vector<double> x(static_cast<std::size_t>(pair.dim()));
  auto row = [&](Index i) {
    for (Index k = 0; k < pair.dim(); ++k) x[static_cast<std::size_t>(k)] = pair.domain(i, k);
    return std::span<const double>(x);
  };
  for (Index i : fold.cheap_train) d.add(row(i), pair.y_cheap[i], model::Fidelity::Cheap);
  for (Index i : fold.exp_train) d.add(row(i), pair.y_exp[i], model::Fidelity::Expensive);
  return d;
}

void write_surface_pair(const SurfacePair& pair, const std::filesystem::path& csv_path) {
  std::ofstream os(csv_path);
  if (!os) throw IoError("cannot write " + csv_path.string());
  for (Index k = 0; k < pair.dim(); ++k) os << 'x' << (k + 1) << ',';
  os << "y_cheap,y_exp\n";
  for (Index i = 0; i < pair.size(); ++i) {
    for (Index k = 0; k < pair.dim(); ++k) os << format_double(pair.domain(i, k)) << ',';
    os << format_double(pair.y_cheap[i]) << ',' << format_double(pair.y_exp[i]) << '\n';
  }
  if (!os) throw IoError("failed writing " + csv_path.string());
  nlohmann::json side = {{"spearman", pair.spearman},
                         {"provenance", to_string(pair.provenance)},
                         {"dim", pair.dim()},
                         {"points", pair.size()},
                         {"meta", pair.meta}};
  std::ofstream js(sidecar_path(csv_path));
  if (!js) throw IoError("cannot write " + sidecar_path(csv_path).string());
  js << side.dump(2) << '\n';
}

SurfacePair read_surface_pair(const std::filesystem::path& csv_path) {
  std::ifstream is(csv_path);
  if (!is) throw IoError("cannot read " + csv_path.string());
  std::string line;
  if (!std::getline(is, line)) throw IoError(csv_path.string() + ": empty file");
  const auto columns = static_cast<Index>(std::count(line.begin(), line.end(), ',') + 1);
  if (columns < 3) throw IoError(csv_path.string() + ": expected x1..xd,y_cheap,y_exp");
  const Index dim = columns - 2;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw IoError(csv_path.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      vals.push_back(v);
    }
    if (static_cast<Index>(vals.size()) != columns) {
      throw IoError(csv_path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    }
    rows.push_back(std::move(vals));
  }
  Matrix x(static_cast<Index>(rows.size()), dim);
  Vector yc(static_cast<Index>(rows.size()));
  Vector ye(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Index>(i);
    for (Index k = 0; k < dim; ++k) x(r, k) = rows[i][static_cast<std::size_t>(k)];
    yc[r] = rows[i][static_cast<std::size_t>(dim)];
    ye[r] = rows[i][static_cast<std::size_t>(dim + 1)];
  }
  Provenance prov = Provenance::GpSampled;
  nlohmann::json meta = nlohmann::json::object();
  std::ifstream js(sidecar_path(csv_path));
  if (js) {
    const auto side = nlohmann::json::parse(js);
    prov = provenance_from_string(side.at("provenance").get<std::string>());
    meta = side.value("meta", nlohmann::json::object());
  }
  return make_surface_pair(std::move(x), std::move(yc), std::move(ye), prov, std::move(meta));
}

}  // namespace bifid::surface
