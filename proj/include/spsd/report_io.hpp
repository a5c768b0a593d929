#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>

#include "spsd/lyapunov.hpp"
#include "spsd/matrix.hpp"
#include "spsd/montecarlo.hpp"
#include "spsd/pnoa.hpp"

namespace spsd {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Plain CSV: one row per line, comma separated, no header.
[[nodiscard]] Matrix parse_matrix_csv(const std::string& text);
[[nodiscard]] Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(std::ostream& os, const Matrix& m);

/// %.17g
[[nodiscard]] std::string format_number(double v);

[[nodiscard]] Json to_json(const Matrix& m);
[[nodiscard]] Json to_json(const Vector& v);
[[nodiscard]] Json to_json(const PdCertificate& c);
[[nodiscard]] Json to_json(const TransformChain& c);
[[nodiscard]] Json to_json(const UnitDiscMembership& m);

/// Summary plus the tabulated mean and covariance, every stride-th grid node.
[[nodiscard]] Json approximation_json(const SpsdApproximation& approx, std::size_t stride);
[[nodiscard]] Json simulation_json(const SimulationReport& rep);

/// Header: time, mean_1..mean_n, cov_11, cov_12, .., cov_nn (upper triangle).
void write_path_csv(std::ostream& os, const SpsdApproximation& approx, std::size_t stride);
/// Header: time, mean_*, cov_*, ref_mean_*, ref_cov_*.
void write_statistics_csv(std::ostream& os, const SimulationReport& rep);

/// Adds schema, schema_version and (unless deterministic) a UTC timestamp.
[[nodiscard]] Json report_envelope(const std::string& kind, bool deterministic);

}  // namespace spsd
