#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "normforge/lewis.hpp"
#include "normforge/norms.hpp"
#include "normforge/sampler.hpp"
#include "normforge/sparsify.hpp"
#include "normforge/verify.hpp"

namespace normforge::io {

using nlohmann::json;

/// {"dim", "p", "terms": [...], "weights"?: [...]}
SumNorm instance_from_json(const json& j);
json instance_to_json(const SumNorm& N);
SumNorm load_instance(const std::string& path);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// JSON array, or "index,weight" CSV when the path ends in .csv.
void write_weights(const std::string& path, const Vector& w);
Vector read_weights(const std::string& path, Index expected);

/// One {"x": [...], "phat": p} object per line.
void write_samples(std::ostream& out, const SampleBatch& batch);
SampleBatch read_samples(const std::string& path);

/// {"q"?, "blocks": [{"start", "size", "p"}]} or {"q"?, "block_size", "p"}.
BlockStructure blocks_from_json(const json& j, Index rows, double q_default);

json to_json(const Vector& v);
json to_json(const StageRecord& rec);
json to_json(const SparsifierResult& result);
json to_json(const VerificationReport& report);
json to_json(const LewisResult& result);
json to_json(const LewisCertificate& cert);

}  // namespace normforge::io
