#include "tracefail/ground_truth.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tracefail/error.hpp"

namespace tracefail {

using nlohmann::json;

std::string_view to_string(Polarity p) { return p == Polarity::Spurious ? "spurious" : "missing"; }

std::map<std::string, std::size_t> GroundTruth::class_sizes() const {
  std::map<std::string, std::size_t> sizes;
  for (const auto& e : experiments) {
    ++sizes[e.mode_label];
  }
  return sizes;
}

const ExperimentTruth* GroundTruth::find(std::string_view experiment_id) const {
  const auto it = std::find_if(experiments.begin(), experiments.end(),
                               [&](const ExperimentTruth& e) { return e.experiment_id == experiment_id; });
  return it == experiments.end() ? nullptr : &*it;
}

void to_json(json& j, const GroundTruth& truth) {
  json experiments = json::array();
  for (const auto& e : truth.experiments) {
    json planted = json::array();
    for (const auto& a : e.planted) {
      planted.push_back({{"polarity", to_string(a.polarity)}, {"event", a.key.str()}, {"position", a.position}});
    }
    experiments.push_back({{"experiment_id", e.experiment_id}, {"mode", e.mode_label}, {"planted", std::move(planted)}});
  }
  j = {{"campaign", truth.campaign},
       {"seed", truth.seed},
       {"class_sizes", truth.class_sizes()},
       {"experiments", std::move(experiments)}};
}

void from_json(const json& j, GroundTruth& truth) {
  try {
    truth = GroundTruth{};
    truth.campaign = j.at("campaign").get<std::string>();
    truth.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("experiments")) {
      ExperimentTruth et;
      et.experiment_id = e.at("experiment_id").get<std::string>();
      et.mode_label = e.at("mode").get<std::string>();
      for (const auto& a : e.at("planted")) {
        const auto pol = a.at("polarity").get<std::string>();
        if (pol != "spurious" && pol != "missing") {
          throw ParseError("unknown polarity '" + pol + "'");
        }
        et.planted.push_back({pol == "spurious" ? Polarity::Spurious : Polarity::Missing,
                              EventKey::parse(a.at("event").get<std::string>()), a.at("position").get<std::size_t>()});
      }
      truth.experiments.push_back(std::move(et));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed ground truth: ") + e.what());
  }
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open ground truth " + path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j.get<GroundTruth>();
}

}  // namespace tracefail
