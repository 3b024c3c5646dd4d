#pragma once

#include "eldyn/brushmodel.hpp"
#include "eldyn/conjugacy.hpp"
#include "eldyn/families.hpp"
#include "eldyn/pipeline.hpp"
#include "eldyn/projection.hpp"
#include "eldyn/rays.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace eldyn::io {

/// Keys keep insertion order so dumps are reproducible.
using Json = nlohmann::ordered_json;

std::string version();
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t h);
/// Shortest round-trip decimal.
std::string format_double(double x);
/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

/// Finite doubles as numbers; inf, -inf and nan as the strings "inf", "-inf", "nan".
Json number(double x);
double number_from(const Json& j);

Json to_json(Complex z);
Complex complex_from(const Json& j);

/// [num, den]; integers that do not fit 64 bits are written as decimal strings.
Json to_json(const Rational& r);
/// Accepts [num, den], an integer, or a "p/q" string.
Rational rational_from(const Json& j);

Json to_json(const FunctionFamily& f);
FunctionFamily family_from(const Json& j);

/// Bare integer k for exponential-type maps, [sign, k] for pairs.
Json to_json(const TractId& t, bool pair);
TractId tract_from(const Json& j, bool pair);
Json to_json(const ExternalAddress& s, bool pair);
ExternalAddress address_from(const Json& j, bool pair);

Json to_json(const ErrorBudget& e);
Json to_json(const RayPoint& p, bool pair);
Json to_json(const HairTail& tail, bool pair);
/// Columns t, re_log, im_log, re_plane, im_plane, err.
std::string tail_csv(const HairTail& tail);

Json to_json(const ProjectionResult& r);
/// Columns n, t.
std::string zn_trace_csv(const ProjectionResult& r);
Json to_json(const DefectReport& r);

Json to_json(const ConjugacyReport& r);
Json to_json(const PipelineResult& r, bool pair);

Json to_json(const QuadHeight& y);
Json to_json(const AffineBrush& B);
AffineBrush brush_from(const Json& j);
Json to_json(const BrushAxiomReport& r);

}  // namespace eldyn::io
