#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dtmfdrive/decoder.hpp"
#include "dtmfdrive/signal.hpp"
#include "dtmfdrive/steering.hpp"

namespace dtmfdrive::cli {

// Steering events for `buffer` run through the detector.
std::vector<steering::SteeringEvent> decode_events(const signal::SampleBuffer& buffer,
                                                   const decoder::DetectorConfig& det,
                                                   const steering::SteeringConfig& steer);

struct Report {
  std::string text;
  nlohmann::json doc;
  bool pass = true;
};

Report build_report();

}  // namespace dtmfdrive::cli
