#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "scalesteg/channel_analysis.hpp"
#include "scalesteg/cost_model.hpp"
#include "scalesteg/inverse_solver.hpp"
#include "scalesteg/stego_codec.hpp"

namespace scalesteg {

using Json = nlohmann::ordered_json;

Json to_json(const ChannelSpec& spec);
ChannelSpec channel_from_json(const Json& j);
Json to_json(const DesignParams& d);
Json to_json(const Lattice& l);
Lattice lattice_from_json(const Json& j);
Json to_json(const StcCode& code);
StcCode code_from_json(const Json& j);
Json to_json(const StegoKey& key);
StegoKey key_from_json(const Json& j);
Json to_json(const EmbedSite& site);
Json to_json(const EmbedPlan& plan);
Json to_json(const PlanReport& report);
Json to_json(const DeltaMap& delta);
Json to_json(const CostMap& costs, const EmbedPlan& plan);
std::string costs_to_csv(const CostMap& costs, const EmbedPlan& plan);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace scalesteg
