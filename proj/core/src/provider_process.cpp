#include "kcover/provider_process.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>

#include <json.hpp>

#include "kcover/errors.hpp"

namespace kcover {

namespace gain_protocol {

std::string handshake_line(int width, int height, int k) {
  nlohmann::ordered_json j;
  j["proto"] = kVersion;
  j["grid"] = {width, height};
  j["k"] = k;
  return j.dump() + "\n";
}

std::string request_header(long long id, int k) {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["channels"] = 1 + k;
  return j.dump() + "\n";
}

std::vector<float> request_channels(const Environment& env, const CumulativeVisibility& cumvis) {
  const std::size_t cells = env.terrain().values().size();
  std::vector<float> out;
  out.reserve(cells * static_cast<std::size_t>(1 + cumvis.k()));
  const double z_ceil = env.z_ceil();
  for (double f : env.terrain().values().values()) out.push_back(static_cast<float>(f / z_ceil));
  for (int l = 1; l <= cumvis.k(); ++l)
    for (double c : cumvis.layer(l).values())
      out.push_back(static_cast<float>(std::min(c, z_ceil) / z_ceil));
  return out;
}

void append_floats(std::string& out, const std::vector<float>& values) {
  const std::size_t offset = out.size();
  out.resize(offset + values.size() * 4);
  for (std::size_t n = 0; n < values.size(); ++n) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(values[n]);
    for (int b = 0; b < 4; ++b) out[offset + 4 * n + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
}

std::vector<float> decode_floats(const std::string& bytes) {
  if (bytes.size() % 4 != 0) throw ProviderError("float payload length is not a multiple of 4");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t n = 0; n < out.size(); ++n) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * n + b])) << (8 * b);
    out[n] = std::bit_cast<float>(bits);
  }
  return out;
}

std::string encode_request(long long id, const Environment& env, const CumulativeVisibility& cumvis) {
  std::string out = request_header(id, cumvis.k());
  append_floats(out, request_channels(env, cumvis));
  return out;
}

}  // namespace gain_protocol

struct ProcessGainProvider::Child {
  pid_t pid = -1;
  int to_child = -1;
  int from_child = -1;
  std::string pending;  // bytes read past the last consumed message

  ~Child() {
    if (to_child >= 0) ::close(to_child);
    if (from_child >= 0) ::close(from_child);
    if (pid > 0) {
      int status = 0;
      ::waitpid(pid, &status, 0);
    }
  }

  void write_all(const std::string& bytes) {
    std::size_t done = 0;
    while (done < bytes.size()) {
      const ssize_t n = ::write(to_child, bytes.data() + done, bytes.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProviderError(std::string("write to gain provider failed: ") + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  bool fill() {
    char buffer[1 << 16];
    for (;;) {
      const ssize_t n = ::read(from_child, buffer, sizeof buffer);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) throw ProviderError(std::string("read from gain provider failed: ") + std::strerror(errno));
      if (n == 0) return false;
      pending.append(buffer, static_cast<std::size_t>(n));
      return true;
    }
  }

  std::string read_line() {
    for (;;) {
      const auto eol = pending.find('\n');
      if (eol != std::string::npos) {
        std::string line = pending.substr(0, eol);
        pending.erase(0, eol + 1);
        return line;
      }
      if (!fill()) throw ProviderError("gain provider closed its output");
    }
  }

  std::string read_bytes(std::size_t count) {
    while (pending.size() < count)
      if (!fill()) throw ProviderError("gain provider closed its output mid-payload");
    std::string out = pending.substr(0, count);
    pending.erase(0, count);
    return out;
  }
};

ProcessGainProvider::ProcessGainProvider(const std::string& command, const Environment& env, int k)
    : child_(std::make_unique<Child>()), env_(env), k_(k) {
  int in_pipe[2];   // parent -> child stdin
  int out_pipe[2];  // child stdout -> parent
  if (::pipe(in_pipe) != 0) throw ProviderError("pipe() failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ProviderError("pipe() failed");
  }
  // A provider that dies mid-write must surface as EPIPE, not kill us.
  ::signal(SIGPIPE, SIG_IGN);

  const pid_t pid = ::fork();
  if (pid < 0) throw ProviderError("fork() failed");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  child_->pid = pid;
  child_->to_child = in_pipe[1];
  child_->from_child = out_pipe[0];

  child_->write_all(gain_protocol::handshake_line(env.width(), env.height(), k));
  const std::string reply = child_->read_line();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply);
  } catch (const nlohmann::json::exception&) {
    throw ProviderError("malformed handshake reply: " + reply);
  }
  if (!j.is_object() || !j.contains("ok") || j["ok"] != true)
    throw ProviderError("gain provider rejected handshake: " + reply);
}

ProcessGainProvider::~ProcessGainProvider() = default;

GainMap ProcessGainProvider::compute(const PlacementState& state) {
  if (state.cumvis.k() != k_) throw ProviderError("placement order differs from the handshake");
  const long long id = next_id_++;
  child_->write_all(gain_protocol::encode_request(id, state.env, state.cumvis));

  const std::string line = child_->read_line();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw ProviderError("malformed response header: " + line);
  }
  if (!header.is_object() || !header.contains("id") || !header["id"].is_number_integer() ||
      header["id"].get<long long>() != id)
    throw ProviderError("response id mismatch: " + line);

  const std::size_t cells =
      static_cast<std::size_t>(state.env.width()) * static_cast<std::size_t>(state.env.height());
  const std::vector<float> predicted = gain_protocol::decode_floats(child_->read_bytes(cells * 4));

  GainMap out(state.env.width(), state.env.height());
  for (std::size_t n = 0; n < cells; ++n) {
    const Cell c = out.values().cell(n);
    if (!is_candidate(state.env, c)) continue;
    const float v = predicted[n];
    if (!std::isfinite(v) || v < 0.0f) throw ProviderError("gain provider returned a negative or non-finite value");
    out.set(c, static_cast<double>(v));
  }
  return out;
}

}  // namespace kcover
