#pragma once

#include "blowtime/bounds.hpp"
#include "blowtime/heat_kernel.hpp"
#include "blowtime/simulator.hpp"
#include "blowtime/study.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <string>

// nlohmann adapters. Doubles go out in shortest round-trip form, so a
// dump/parse cycle restores every field bit for bit. Absent optionals are null.
namespace blowtime::geometry {
void to_json(nlohmann::json& j, const QuadratureSpec& v);
void from_json(const nlohmann::json& j, QuadratureSpec& v);
}  // namespace blowtime::geometry

namespace blowtime::kernel {
void to_json(nlohmann::json& j, const MassGrid& v);
void from_json(const nlohmann::json& j, MassGrid& v);
void to_json(nlohmann::json& j, const GaussianGrid& v);
void from_json(const nlohmann::json& j, GaussianGrid& v);
void to_json(nlohmann::json& j, const MassEstimate& v);
void from_json(const nlohmann::json& j, MassEstimate& v);
void to_json(nlohmann::json& j, const GaussianEstimate& v);
void from_json(const nlohmann::json& j, GaussianEstimate& v);
void to_json(nlohmann::json& j, const KernelConstants& v);
void from_json(const nlohmann::json& j, KernelConstants& v);
void to_json(nlohmann::json& j, const IdentityTerms& v);
void from_json(const nlohmann::json& j, IdentityTerms& v);
}  // namespace blowtime::kernel

namespace blowtime::bounds {
void to_json(nlohmann::json& j, const BoundsInput& v);
void from_json(const nlohmann::json& j, BoundsInput& v);
void to_json(nlohmann::json& j, const DerivedConstants& v);
void from_json(const nlohmann::json& j, DerivedConstants& v);
void to_json(nlohmann::json& j, const LogBound& v);
void from_json(const nlohmann::json& j, LogBound& v);
void to_json(nlohmann::json& j, const BoundsReport& v);
void from_json(const nlohmann::json& j, BoundsReport& v);
void to_json(nlohmann::json& j, const TraceEntry& v);
void from_json(const nlohmann::json& j, TraceEntry& v);
void to_json(nlohmann::json& j, const SequenceTrace& v);
void from_json(const nlohmann::json& j, SequenceTrace& v);
}  // namespace blowtime::bounds

namespace blowtime::sim {
void to_json(nlohmann::json& j, const HistorySample& v);
void from_json(const nlohmann::json& j, HistorySample& v);
void to_json(nlohmann::json& j, const BlowupEstimate& v);
void from_json(const nlohmann::json& j, BlowupEstimate& v);
void to_json(nlohmann::json& j, const RepresentationResult& v);
void from_json(const nlohmann::json& j, RepresentationResult& v);
}  // namespace blowtime::sim

namespace blowtime::study {
void to_json(nlohmann::json& j, const SlopeFit& v);
void from_json(const nlohmann::json& j, SlopeFit& v);
void to_json(nlohmann::json& j, const SweepRow& v);
void from_json(const nlohmann::json& j, SweepRow& v);
}  // namespace blowtime::study

namespace blowtime::io {

using json = nlohmann::json;

// printf %.17g: enough digits to round-trip any double.
std::string format_double(double v);

struct RunManifest {
    std::string subcommand;
    std::map<std::string, std::string> args;  // option name -> value as given
    std::string version = BLOWTIME_VERSION;
    std::string timestamp;                    // ISO 8601 UTC
    std::string input_hash;                   // FNV-1a 64 of subcommand and args

    // Fills version, timestamp and hash. The timestamp comes from
    // SOURCE_DATE_EPOCH when set so repeated runs are byte-identical.
    static RunManifest make(std::string subcommand, std::map<std::string, std::string> args);
};

void to_json(json& j, const RunManifest& v);
void from_json(const json& j, RunManifest& v);

std::string fnv1a_hex(std::string_view text);

// Pretty JSON document with the manifest under "manifest".
std::string document(json body, const RunManifest& manifest);

// "# manifest {...}" line, header row, then one line per sweep row.
// Missing values are empty fields.
void write_sweep_csv(std::ostream& out, const study::SweepTable& table, const RunManifest& manifest);
std::string sweep_csv(const study::SweepTable& table, const RunManifest& manifest);
const std::vector<std::string>& sweep_csv_header();

}  // namespace blowtime::io
