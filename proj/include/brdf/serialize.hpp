#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "brdf/datasets.hpp"
#include "brdf/density_tree.hpp"
#include "brdf/forest.hpp"
#include "brdf/kde.hpp"
#include "brdf/partition.hpp"
#include "brdf/volume.hpp"

// JSON documents for every persisted type. Doubles are written in the
// shortest form that parses back to the same bits, so load(dump(x)) == x.
namespace brdf::io {

using nlohmann::json;

json to_json(const BoundingBox& box);
BoundingBox bounding_box_from_json(const json& j);

json to_json(const Partition& part);
Partition partition_from_json(const json& j);

json to_json(const VolumeTable& table);
VolumeTable volume_table_from_json(const json& j);

json to_json(const DensityTree& tree);
DensityTree density_tree_from_json(const json& j);

json to_json(const ForestConfig& config);
ForestConfig forest_config_from_json(const json& j);

json to_json(const SelectionRecord& record);
SelectionRecord selection_record_from_json(const json& j);

json to_json(const Forest& forest);
Forest forest_from_json(const json& j);

json to_json(const PreprocessState& state);
PreprocessState preprocess_state_from_json(const json& j);

json to_json(const KdeModel& model);
KdeModel kde_from_json(const json& j);

json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const json& j);

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string fingerprint(const json& j);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace brdf::io
