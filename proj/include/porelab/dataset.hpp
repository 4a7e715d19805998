#pragma once

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "porelab/core.hpp"
#include "porelab/format.hpp"
#include "porelab/geometry.hpp"
#include "porelab/lbm.hpp"
#include "porelab/parallel.hpp"
#include "porelab/properties.hpp"
#include "porelab/rng.hpp"

namespace porelab::dataset {

using format::GeneratorKind;

struct GeneratorConfig {
  std::size_t count = 10;
  std::size_t size = 64;
  double porosity_min = 0.70;
  double porosity_max = 0.95;
  GeneratorKind kind = GeneratorKind::trig;
  std::uint64_t seed = 1;
  lbm::LbmParams params;
  double p_circle = 0.5;          // shapes
  std::size_t wall_thickness = 0;  // pipe; 0 selects max(1, L/32)
  std::size_t max_attempts = 1000;

  void validate() const {
    if (size < kMinGridSize || size > 0xFFFF) throw ParameterError("dataset: size out of range");
    if (!(porosity_min > 0.0 && porosity_min <= porosity_max && porosity_max < 1.0))
      throw ParameterError("dataset: porosity range must satisfy 0 < min <= max < 1");
    if (kind == GeneratorKind::none) throw ParameterError("dataset: generator kind required");
    if (max_attempts < 1) throw ParameterError("dataset: max_attempts must be >= 1");
    params.validate();
  }
};

/// Structure and the provenance needed to rebuild it.
struct GeneratedStructure {
  StructureGrid grid;
  GeneratorKind kind = GeneratorKind::none;
  std::uint64_t seed = 0;
  std::uint64_t attempt = 0;
  double porosity_target = 0.0;
};

struct DatasetRecord {
  std::uint64_t id = 0;
  StructureGrid structure;
  VelocityField field;  // f32-quantized converged solution
  MacroProperties properties;
  lbm::LbmParams params;
  GeneratorKind kind = GeneratorKind::none;
  std::uint64_t seed = 0;
  double porosity_target = 0.0;
  std::int64_t iterations = 0;

  format::RecordData to_record() const { return {structure, field, params, kind}; }
};

struct SkippedSample {
  std::uint64_t id = 0;
  std::uint64_t seed = 0;
  std::string reason;
};

struct GenerationResult {
  std::vector<DatasetRecord> records;  // ascending id
  std::vector<SkippedSample> skipped;
};

inline std::size_t default_wall_thickness(std::size_t size) { return std::max<std::size_t>(1, size / 32); }

/// Deterministic structure for one derived seed at a given target porosity.
inline StructureGrid build_structure(GeneratorKind kind, std::uint64_t seed, std::size_t size, double porosity,
                                     double p_circle = 0.5, std::size_t wall_thickness = 0) {
  const std::uint64_t gseed = mix64(seed);
  switch (kind) {
    case GeneratorKind::trig:
      return threshold_to_porosity(gen_trig_field(gseed, size), porosity);
    case GeneratorKind::shapes: {
      ShapeOptions opt;
      opt.porosity = porosity;
      opt.p_circle = p_circle;
      return gen_shapes(gseed, opt, size);
    }
    case GeneratorKind::pipe: {
      const std::size_t t = wall_thickness ? wall_thickness : default_wall_thickness(size);
      if (porosity > 1.0 - 2.0 * static_cast<double>(t) / static_cast<double>(size))
        throw ParameterError("dataset: pipe walls alone exceed the requested solid fraction");
      const bool central = (gseed >> 63) != 0;
      const StructureGrid walls = pipe_wall_mask(size, t, central);
      return threshold_to_porosity(gen_trig_field(gseed, size), porosity, &walls);
    }
    case GeneratorKind::none:
      break;
  }
  throw ParameterError("dataset: generator kind required");
}

/// Target porosity drawn from the sample seed.
inline double draw_porosity(std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  return lo == hi ? lo : uniform_real(rng, lo, hi);
}

/// Structure for record `index`: attempt 0, 1, ... until one percolates along x.
inline GeneratedStructure generate_structure(const GeneratorConfig& cfg, std::uint64_t index) {
  for (std::uint64_t attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    GeneratedStructure s;
    s.kind = cfg.kind;
    s.seed = derive_seed(cfg.seed, index, attempt);
    s.attempt = attempt;
    s.porosity_target = draw_porosity(s.seed, cfg.porosity_min, cfg.porosity_max);
    s.grid = build_structure(cfg.kind, s.seed, cfg.size, s.porosity_target, cfg.p_circle, cfg.wall_thickness);
    if (percolates(s.grid, Axis::x)) return s;
  }
  throw DataError("dataset: no percolating structure for index " + std::to_string(index));
}

inline DatasetRecord make_record(std::uint64_t id, const GeneratedStructure& s, const VelocityField& solution,
                                 std::int64_t iterations, const lbm::LbmParams& params) {
  DatasetRecord rec;
  rec.id = id;
  rec.structure = s.grid;
  rec.field = format::quantize(solution);
  rec.properties = summary(rec.field, rec.structure, params);
  rec.params = params;
  rec.kind = s.kind;
  rec.seed = s.seed;
  rec.porosity_target = s.porosity_target;
  rec.iterations = iterations;
  return rec;
}

/// Generates, filters and simulates `cfg.count` samples over `jobs` threads.
/// Samples whose solver run fails are reported in `skipped` (and on `log`).
inline GenerationResult generate_dataset(const GeneratorConfig& cfg, std::size_t jobs = 1, std::ostream* log = nullptr) {
  cfg.validate();
  std::vector<std::optional<DatasetRecord>> slots(cfg.count);
  std::vector<std::optional<SkippedSample>> failures(cfg.count);
  parallel_for(cfg.count, jobs, [&](std::size_t i) {
    const auto s = generate_structure(cfg, i);
    try {
      const auto sol = lbm::solve(s.grid, cfg.params);
      slots[i] = make_record(i, s, sol.field, sol.iterations, cfg.params);
    } catch (const lbm::NonConvergenceError& e) {
      failures[i] = SkippedSample{i, s.seed, e.what()};
    } catch (const DivergenceError& e) {
      failures[i] = SkippedSample{i, s.seed, e.what()};
    }
  });
  GenerationResult out;
  for (std::size_t i = 0; i < cfg.count; ++i) {
    if (slots[i]) out.records.push_back(std::move(*slots[i]));
    if (failures[i]) {
      if (log) *log << "skipped record " << i << " (seed " << failures[i]->seed << "): " << failures[i]->reason << '\n';
      out.skipped.push_back(std::move(*failures[i]));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

inline constexpr const char* kManifestName = "manifest.csv";
inline constexpr const char* kSkippedName = "skipped.csv";
inline constexpr const char* kManifestHeader = "id,file,phi,tau,k,iterations,kind,seed,phi_target";

struct ManifestRow {
  std::uint64_t id = 0;
  std::string file;
  double porosity = 0.0;
  double tortuosity = 0.0;
  double permeability = 0.0;
  std::int64_t iterations = 0;
  GeneratorKind kind = GeneratorKind::none;
  std::uint64_t seed = 0;
  double porosity_target = 0.0;
};

inline std::string record_file_name(std::uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rec_%06" PRIu64 ".pfl", id);
  return buf;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline ManifestRow manifest_row(const DatasetRecord& r) {
  return {r.id, record_file_name(r.id), r.properties.porosity, r.properties.tortuosity, r.properties.permeability,
          r.iterations, r.kind, r.seed, r.porosity_target};
}

inline void write_manifest(std::ostream& os, const std::vector<ManifestRow>& rows) {
  os << kManifestHeader << '\n';
  for (const auto& r : rows) {
    os << r.id << ',' << r.file << ',' << format_double(r.porosity) << ',' << format_double(r.tortuosity) << ','
       << format_double(r.permeability) << ',' << r.iterations << ',' << format::to_string(r.kind) << ',' << r.seed
       << ',' << format_double(r.porosity_target) << '\n';
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::vector<ManifestRow> read_manifest(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kManifestHeader) throw DataError("manifest: unexpected header");
  std::vector<ManifestRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 9) throw DataError("manifest: malformed row: " + line);
    try {
      rows.push_back({std::stoull(c[0]), c[1], std::stod(c[2]), std::stod(c[3]), std::stod(c[4]), std::stoll(c[5]),
                      format::kind_from_string(c[6]), std::stoull(c[7]), std::stod(c[8])});
    } catch (const ParameterError&) {
      throw DataError("manifest: unknown generator kind: " + line);
    } catch (const std::logic_error&) {
      throw DataError("manifest: malformed row: " + line);
    }
  }
  return rows;
}

inline std::vector<ManifestRow> read_manifest(const std::filesystem::path& dir) {
  std::ifstream is(dir / kManifestName);
  if (!is) throw DataError("cannot open manifest in " + dir.string());
  return read_manifest(is);
}

/// Writes every record file, then the manifest and the skipped-sample log.
inline void write_dataset(const std::filesystem::path& dir, const GenerationResult& result) {
  std::filesystem::create_directories(dir);
  std::vector<ManifestRow> rows;
  for (const auto& r : result.records) {
    format::write_record(dir / record_file_name(r.id), r.to_record());
    rows.push_back(manifest_row(r));
  }
  std::ofstream manifest(dir / kManifestName, std::ios::trunc);
  write_manifest(manifest, rows);
  std::ofstream skipped(dir / kSkippedName, std::ios::trunc);
  skipped << "id,seed,reason\n";
  for (const auto& s : result.skipped) skipped << s.id << ',' << s.seed << ",\"" << s.reason << "\"\n";
  if (!manifest || !skipped) throw DataError("failed writing dataset index in " + dir.string());
}

/// Loads one record listed in a manifest, recomputing its properties.
inline DatasetRecord load_record(const std::filesystem::path& dir, const ManifestRow& row) {
  auto data = format::read_record(dir / row.file);
  DatasetRecord rec;
  rec.id = row.id;
  rec.structure = std::move(data.structure);
  rec.field = std::move(data.field);
  rec.params = data.params;
  rec.kind = data.kind;
  rec.properties = summary(rec.field, rec.structure, rec.params);
  rec.seed = row.seed;
  rec.porosity_target = row.porosity_target;
  rec.iterations = row.iterations;
  return rec;
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

struct Split {
  std::vector<std::uint64_t> train;
  std::vector<std::uint64_t> validation;
  std::vector<std::uint64_t> test;
};

/// Seeded shuffle, then the first round(f0 n) ids train, the next round(f1 n)
/// validate and the remainder test.
inline Split split(std::vector<std::uint64_t> ids, std::uint64_t seed, std::array<double, 3> fractions = {0.70, 0.15, 0.15}) {
  if (ids.empty()) throw DataError("split: no ids");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ParameterError("split: fractions must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("split: fractions must sum to 1");
  Rng rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const std::size_t n = ids.size();
  const auto n_train = std::min(n, static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n))));
  const auto n_val =
      std::min(n - n_train, static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n))));
  Split out;
  out.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.validation.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                        ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), ids.end());
  return out;
}

}  // namespace porelab::dataset
