#pragma once

// File formats: sequence CSV (`n,re,im`) and JSON, point-list CSV, and JSON
// encodings of reports and witness records. See docs/formats.md.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nilscope/cubes.hpp"
#include "nilscope/nilsequence.hpp"
#include "nilscope/proximality.hpp"
#include "nilscope/regularity.hpp"

namespace nilscope {

using Json = nlohmann::ordered_json;

/// Malformed input; `line` is 1-based, 0 when not line-oriented.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Shortest round-trip decimal representation.
std::string format_double(double v);

void write_sequence_csv(std::ostream& os, const SequenceSample& u);
/// Rows must carry consecutive ascending indices.
SequenceSample read_sequence_csv(std::istream& is);

Json sequence_to_json(const SequenceSample& u, double bound);
SequenceSample sequence_from_json(const Json& j);

/// Reads CSV, or JSON when the extension is .json. Throws std::runtime_error
/// if the file cannot be opened and ParseError on malformed content.
SequenceSample load_sequence(const std::filesystem::path& path);

/// One point per row, comma separated; an optional header row whose first
/// field is not numeric is skipped.
std::vector<std::vector<double>> read_points_csv(std::istream& is);

Json report_to_json(const RegularityReport& r);
/// Header `k,m,n,p,gap`, one violation per row in report order.
void write_violations_csv(std::ostream& os, const RegularityReport& r);

Json calibration_to_json(const CalibrationResult& c);

Json to_json(const NilPoint& p);
Json to_json(const TorusPoint& p);
Json to_json(const Shifts& s);

template <class P>
Json witness_to_json(const WitnessRecord<P>& w) {
  Json j;
  j["relation"] = to_string(w.relation);
  j["eps_achieved"] = w.eps_achieved;
  j["m"] = w.m;
  j["n"] = w.n;
  j["x"] = to_json(w.x);
  j["y"] = to_json(w.y);
  j["x_prime"] = to_json(w.x_prime);
  j["y_prime"] = to_json(w.y_prime);
  j["exhausted"] = w.exhausted;
  j["n_max"] = w.n_max;
  return j;
}

template <class P>
Json completion_to_json(const CompletionResult<P>& c) {
  Json j;
  j["status"] = to_string(c.status);
  if (c.status == CompletionStatus::face_rejected) {
    j["bad_face"] = *c.bad_face;
    j["bad_face_residual"] = c.bad_face_residual;
    return j;
  }
  j["x7"] = to_json(c.x7);
  j["residual"] = c.residual;
  j["witness_mnp"] = to_json(c.witness);
  j["spread"] = c.spread;
  j["near_witnesses"] = c.near_witnesses;
  return j;
}

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace nilscope
