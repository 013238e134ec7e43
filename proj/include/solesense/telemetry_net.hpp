#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "solesense/acquisition.hpp"
#include "solesense/gait_synth.hpp"
#include "solesense/sensor_model.hpp"
#include "solesense/telemetry.hpp"

namespace solesense {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;

  // "host:port", "host" or ":port". Throws Config.
  static Endpoint parse(const std::string& text);
  // SOLESENSE_ADDR when set, otherwise the default.
  static Endpoint from_env();
  std::string to_string() const;
};

TelemetryFrame make_frame(std::uint8_t device_id, std::uint32_t sequence,
                          const PressureSample& sample, const CalibrationProfile& profile,
                          const DividerConfig& divider);
PressureSample frame_to_sample(const TelemetryFrame& frame, const CalibrationProfile& profile,
                               const DividerConfig& divider);

// Device side of the link. Failures throw Error(Network).
class FrameTransport {
 public:
  virtual ~FrameTransport() = default;
  virtual void connect() = 0;
  virtual void send(std::span<const std::uint8_t> bytes) = 0;
  virtual void close() = 0;
};

class TcpClientTransport final : public FrameTransport {
 public:
  explicit TcpClientTransport(Endpoint endpoint);
  ~TcpClientTransport() override;
  TcpClientTransport(const TcpClientTransport&) = delete;
  TcpClientTransport& operator=(const TcpClientTransport&) = delete;

  void connect() override;
  void send(std::span<const std::uint8_t> bytes) override;
  void close() override;

 private:
  Endpoint endpoint_;
  int fd_ = -1;
};

// Collector side: a blocking byte stream; read() returns 0 at end of stream.
class ByteSource {
 public:
  virtual ~ByteSource() = default;
  virtual std::size_t read(std::span<std::uint8_t> out) = 0;
};

// In-memory pipe usable as both ends of a lossless link.
class ByteChannel final : public ByteSource {
 public:
  void write(std::span<const std::uint8_t> bytes);
  void close_write();
  std::size_t read(std::span<std::uint8_t> out) override;

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::uint8_t> data_;
  bool closed_ = false;
};

class InMemoryTransport final : public FrameTransport {
 public:
  explicit InMemoryTransport(std::shared_ptr<ByteChannel> channel) : channel_(std::move(channel)) {}
  void connect() override {}
  void send(std::span<const std::uint8_t> bytes) override { channel_->write(bytes); }
  void close() override { channel_->close_write(); }

 private:
  std::shared_ptr<ByteChannel> channel_;
};

enum class Pacing { Replay, WallClock };

struct EmitterConfig {
  std::uint8_t device_id = 1;
  Pacing pacing = Pacing::Replay;
  double rate_hz = 100.0;
  std::chrono::milliseconds backoff_base{100};
  std::chrono::milliseconds backoff_cap{5000};
  int max_attempts = 20;  // consecutive failed connects before giving up
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

// base * 2^attempt, capped.
std::chrono::milliseconds backoff_delay(int attempt, std::chrono::milliseconds base,
                                        std::chrono::milliseconds cap);

struct EmitterStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t reconnects = 0;
  std::uint32_t next_sequence = 0;
};

// One frame per sample, sequence counting up from 0. A frame whose send fails is resent
// on the new connection, so the sequence carries on across reconnects.
class Emitter {
 public:
  Emitter(EmitterConfig config, FrameTransport& transport, const CalibrationProfile& profile,
          DividerConfig divider);

  using SampleSource = std::function<std::optional<PressureSample>()>;
  EmitterStats run(const SampleSource& source);
  EmitterStats run(std::span<const PressureSample> samples);

 private:
  void connect_with_retry();
  void send_frame(const FrameBytes& bytes);

  EmitterConfig config_;
  FrameTransport& transport_;
  CalibrationProfile profile_;
  DividerConfig divider_;
  EmitterStats stats_;
};

struct DeviceSample {
  std::uint8_t device_id;
  std::uint32_t sequence;
  PressureSample sample;
};

// Receives decoded samples; must tolerate concurrent calls from different connections.
class SampleSink {
 public:
  virtual ~SampleSink() = default;
  virtual void accept(const DeviceSample& sample) = 0;
};

class MemorySink final : public SampleSink {
 public:
  void accept(const DeviceSample& sample) override;
  std::map<std::uint8_t, std::vector<DeviceSample>> snapshot() const;
  std::size_t total() const;

 private:
  mutable std::mutex mu_;
  std::map<std::uint8_t, std::vector<DeviceSample>> by_device_;
};

struct DeviceStats {
  std::uint64_t frames = 0;
  std::uint64_t gaps = 0;  // sequence numbers skipped
  std::optional<std::uint32_t> last_sequence;
};

// Per-device sequence bookkeeping shared across connections.
class SequenceTracker {
 public:
  void observe(std::uint8_t device_id, std::uint32_t sequence);
  std::map<std::uint8_t, DeviceStats> snapshot() const;

 private:
  mutable std::mutex mu_;
  std::map<std::uint8_t, DeviceStats> devices_;
};

struct ConnectionStats {
  std::optional<std::uint8_t> device_id;
  DecoderStats decoder;
};

// Decodes one connection until end of stream, forwarding samples in arrival order.
ConnectionStats run_pipeline(ByteSource& source, SampleSink& sink, SequenceTracker& tracker,
                             const CalibrationProfile& profile, const DividerConfig& divider);

struct CollectorConfig {
  Endpoint listen{};
  DividerConfig divider{};
};

struct CollectorStats {
  std::size_t connections_accepted = 0;
  std::size_t connections_closed = 0;
  std::uint64_t resync_events = 0;
  std::uint64_t skipped_bytes = 0;
  std::map<std::uint8_t, DeviceStats> devices;
};

// TCP server; one reader thread per connection.
class Collector {
 public:
  Collector(CollectorConfig config, CalibrationProfile profile, SampleSink& sink);
  ~Collector();
  Collector(const Collector&) = delete;
  Collector& operator=(const Collector&) = delete;

  // Binds and starts accepting. Throws Error(Network).
  void start();
  std::uint16_t port() const noexcept { return port_; }
  // Closes the listener and all connections, then joins every thread.
  void stop();

  // Blocks until `n` connections have closed or the timeout expires.
  bool wait_for_closed(std::size_t n, std::chrono::milliseconds timeout);
  CollectorStats stats() const;

 private:
  void accept_loop();
  void serve(int fd);

  CollectorConfig config_;
  CalibrationProfile profile_;
  SampleSink& sink_;
  SequenceTracker tracker_;

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;

  mutable std::mutex mu_;
  std::condition_variable closed_cv_;
  std::vector<std::thread> workers_;
  std::vector<int> open_fds_;
  CollectorStats stats_;
};

}  // namespace solesense
