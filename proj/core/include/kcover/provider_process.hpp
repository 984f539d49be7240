#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kcover/planner.hpp"

namespace kcover {

/// Wire format of the gain-provider protocol. Every message is one JSON line,
/// optionally followed by raw little-endian float32 payload:
///
///   handshake  -> {"proto":1,"grid":[W,H],"k":k}
///              <- {"ok":true}
///   request    -> {"id":n,"channels":1+k} + (1+k)*W*H floats
///              <- {"id":n} + W*H floats
///
/// Request channel 0 is terrain / z_ceil, channels 1..k are C_l / z_ceil,
/// each row-major.
namespace gain_protocol {

inline constexpr int kVersion = 1;

std::string handshake_line(int width, int height, int k);
std::string request_header(long long id, int k);

/// Normalized request channels in wire order.
std::vector<float> request_channels(const Environment& env, const CumulativeVisibility& cumvis);

/// Header line plus payload bytes, exactly as written to the provider.
std::string encode_request(long long id, const Environment& env, const CumulativeVisibility& cumvis);

void append_floats(std::string& out, const std::vector<float>& values);
std::vector<float> decode_floats(const std::string& bytes);

}  // namespace gain_protocol

/// Gain provider backed by a child process speaking the protocol above on its
/// stdin/stdout. The command is run through /bin/sh -c. Requests are
/// serialized; the child is sent EOF and reaped on destruction.
class ProcessGainProvider final : public GainProvider {
 public:
  ProcessGainProvider(const std::string& command, const Environment& env, int k);
  ~ProcessGainProvider() override;

  ProcessGainProvider(const ProcessGainProvider&) = delete;
  ProcessGainProvider& operator=(const ProcessGainProvider&) = delete;

  /// Predicted map masked to candidate cells. Throws ProviderError on any
  /// protocol violation, a dead child, or negative / non-finite predictions.
  GainMap compute(const PlacementState& state) override;
  std::string name() const override { return "surrogate"; }

 private:
  struct Child;
  std::unique_ptr<Child> child_;
  const Environment& env_;
  int k_;
  long long next_id_ = 0;
};

}  // namespace kcover
