#pragma once

#include <string>
#include <string_view>

#include "subfinsler/manifold.hpp"

namespace subfinsler {

/// Parse a manifold spec document:
///
///   { "dim": n,
///     "domain": {"min": [n floats], "max": [n floats]},     // optional
///     "frames": [ [n expression strings], ... k entries ],
///     "norm": {"type": "euclidean"}
///           | {"type": "quadratic", "G": [[k x k floats]]}
///           | {"type": "randers", "G": [[k x k floats]], "b": [k floats]} }
///
/// Throws SchemaError for missing/extra/ill-typed fields and
/// ValidationError for semantic problems (k > n, wrong component counts,
/// non-SPD forms, Randers drift with b'G^{-1}b >= 1, rank-deficient frames).
ManifoldSpec parse_manifold_spec(std::string_view document);

/// parse_manifold_spec applied to the contents of `path`.
ManifoldSpec load_manifold_spec(const std::string& path);

}  // namespace subfinsler
