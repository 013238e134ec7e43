#include "solesense/telemetry_net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "text_util.hpp"

namespace solesense {

namespace {

Error net_error(const std::string& what) {
  return Error(ErrorKind::Network, what + ": " + std::strerror(errno));
}

struct AddrInfoDeleter {
  void operator()(addrinfo* ai) const noexcept { freeaddrinfo(ai); }
};

std::unique_ptr<addrinfo, AddrInfoDeleter> resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* out = nullptr;
  const std::string port = std::to_string(ep.port);
  const int rc = getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(), &hints, &out);
  if (rc != 0) {
    throw Error(ErrorKind::Network, "cannot resolve " + ep.to_string() + ": " + gai_strerror(rc));
  }
  return std::unique_ptr<addrinfo, AddrInfoDeleter>(out);
}

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
  Endpoint ep;
  const std::string t(trim(text));
  if (t.empty()) throw Error(ErrorKind::Config, "empty address");
  const auto colon = t.rfind(':');
  if (colon == std::string::npos) {
    ep.host = t;
    return ep;
  }
  if (colon > 0) ep.host = t.substr(0, colon);
  const std::string port = t.substr(colon + 1);
  long long value = 0;
  try {
    value = parse_int(port);
  } catch (const Error&) {
    throw Error(ErrorKind::Config, "invalid port in address '" + text + "'");
  }
  if (value < 0 || value > 65535) throw Error(ErrorKind::Config, "port out of range in '" + text + "'");
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

Endpoint Endpoint::from_env() {
  const char* env = std::getenv("SOLESENSE_ADDR");
  if (env != nullptr && *env != '\0') return parse(env);
  return Endpoint{};
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

TelemetryFrame make_frame(std::uint8_t device_id, std::uint32_t sequence,
                          const PressureSample& sample, const CalibrationProfile& profile,
                          const DividerConfig& divider) {
  if (divider.adc_bits > 16) {
    throw Error(ErrorKind::Config, "telemetry counts are 16 bit; adc_bits must be <= 16");
  }
  if (!(sample.timestamp_s >= 0.0) || !std::isfinite(sample.timestamp_s)) {
    throw Error(ErrorKind::Domain, "sample timestamp must be finite and non-negative");
  }
  TelemetryFrame f;
  f.device_id = device_id;
  f.sequence = sequence;
  f.timestamp_ms = static_cast<std::uint64_t>(std::llround(sample.timestamp_s * 1000.0));
  for (auto c : kAllChannels) {
    f.counts[index_of(c)] =
        static_cast<std::uint16_t>(pressure_to_count(sample[c], profile, divider).value);
  }
  return f;
}

PressureSample frame_to_sample(const TelemetryFrame& frame, const CalibrationProfile& profile,
                               const DividerConfig& divider) {
  PressureSample s;
  s.timestamp_s = static_cast<double>(frame.timestamp_ms) / 1000.0;
  for (auto c : kAllChannels) {
    s.channels[index_of(c)] =
        count_to_pressure(AdcCount{frame.counts[index_of(c)]}, profile, divider).pressure;
  }
  return s;
}

TcpClientTransport::TcpClientTransport(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

TcpClientTransport::~TcpClientTransport() { close(); }

void TcpClientTransport::connect() {
  close();
  auto ai = resolve(endpoint_, false);
  int last_errno = 0;
  for (addrinfo* p = ai.get(); p != nullptr; p = p->ai_next) {
    const int fd = ::socket(p->ai_family, p->ai_socktype | SOCK_CLOEXEC, p->ai_protocol);
    if (fd < 0) {
      last_errno = errno;
      continue;
    }
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      fd_ = fd;
      return;
    }
    last_errno = errno;
    ::close(fd);
  }
  errno = last_errno;
  throw net_error("cannot connect to " + endpoint_.to_string());
}

void TcpClientTransport::send(std::span<const std::uint8_t> bytes) {
  if (fd_ < 0) throw Error(ErrorKind::Network, "not connected");
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      const auto err = net_error("send to " + endpoint_.to_string());
      close();
      throw err;
    }
    sent += static_cast<std::size_t>(n);
  }
}

void TcpClientTransport::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void ByteChannel::write(std::span<const std::uint8_t> bytes) {
  {
    std::lock_guard lock(mu_);
    if (closed_) throw Error(ErrorKind::Network, "write to closed channel");
    data_.insert(data_.end(), bytes.begin(), bytes.end());
  }
  cv_.notify_all();
}

void ByteChannel::close_write() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::size_t ByteChannel::read(std::span<std::uint8_t> out) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !data_.empty() || closed_; });
  const std::size_t n = std::min(out.size(), data_.size());
  std::copy_n(data_.begin(), n, out.begin());
  data_.erase(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(n));
  return n;
}

std::chrono::milliseconds backoff_delay(int attempt, std::chrono::milliseconds base,
                                        std::chrono::milliseconds cap) {
  if (attempt < 0) attempt = 0;
  auto d = base;
  for (int i = 0; i < attempt && d < cap; ++i) d *= 2;
  return std::min(d, cap);
}

Emitter::Emitter(EmitterConfig config, FrameTransport& transport,
                 const CalibrationProfile& profile, DividerConfig divider)
    : config_(std::move(config)), transport_(transport), profile_(profile), divider_(divider) {
  divider_.validate();
  if (config_.max_attempts < 1) throw Error(ErrorKind::Config, "max_attempts must be >= 1");
  if (!(config_.rate_hz > 0.0)) throw Error(ErrorKind::Config, "rate must be positive");
  if (!config_.sleep) {
    config_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

void Emitter::connect_with_retry() {
  for (int attempt = 0;; ++attempt) {
    try {
      transport_.connect();
      return;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Network || attempt + 1 >= config_.max_attempts) throw;
      config_.sleep(backoff_delay(attempt, config_.backoff_base, config_.backoff_cap));
    }
  }
}

void Emitter::send_frame(const FrameBytes& bytes) {
  for (;;) {
    try {
      transport_.send(bytes);
      return;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Network) throw;
      ++stats_.reconnects;
      transport_.close();
      connect_with_retry();
    }
  }
}

EmitterStats Emitter::run(const SampleSource& source) {
  connect_with_retry();
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t index = 0;
  while (auto sample = source()) {
    if (config_.pacing == Pacing::WallClock) {
      const auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(index / config_.rate_hz));
      const auto now = std::chrono::steady_clock::now();
      if (due > now) {
        config_.sleep(std::chrono::ceil<std::chrono::milliseconds>(due - now));
      }
    }
    const auto frame = make_frame(config_.device_id, stats_.next_sequence, *sample, profile_, divider_);
    send_frame(encode(frame));
    ++stats_.frames_sent;
    ++stats_.next_sequence;
    ++index;
  }
  transport_.close();
  return stats_;
}

EmitterStats Emitter::run(std::span<const PressureSample> samples) {
  std::size_t i = 0;
  return run([&]() -> std::optional<PressureSample> {
    if (i >= samples.size()) return std::nullopt;
    return samples[i++];
  });
}

void MemorySink::accept(const DeviceSample& sample) {
  std::lock_guard lock(mu_);
  by_device_[sample.device_id].push_back(sample);
}

std::map<std::uint8_t, std::vector<DeviceSample>> MemorySink::snapshot() const {
  std::lock_guard lock(mu_);
  return by_device_;
}

std::size_t MemorySink::total() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [id, v] : by_device_) n += v.size();
  return n;
}

void SequenceTracker::observe(std::uint8_t device_id, std::uint32_t sequence) {
  std::lock_guard lock(mu_);
  auto& d = devices_[device_id];
  ++d.frames;
  if (d.last_sequence && sequence > *d.last_sequence + 1) {
    d.gaps += sequence - *d.last_sequence - 1;
  }
  d.last_sequence = sequence;
}

std::map<std::uint8_t, DeviceStats> SequenceTracker::snapshot() const {
  std::lock_guard lock(mu_);
  return devices_;
}

ConnectionStats run_pipeline(ByteSource& source, SampleSink& sink, SequenceTracker& tracker,
                             const CalibrationProfile& profile, const DividerConfig& divider) {
  ConnectionStats out;
  StreamDecoder decoder;
  std::array<std::uint8_t, 4096> buf{};
  auto drain = [&] {
    while (auto frame = decoder.next()) {
      if (!out.device_id) out.device_id = frame->device_id;
      tracker.observe(frame->device_id, frame->sequence);
      sink.accept(DeviceSample{frame->device_id, frame->sequence,
                               frame_to_sample(*frame, profile, divider)});
    }
  };
  for (;;) {
    const std::size_t n = source.read(buf);
    if (n == 0) break;
    decoder.feed(std::span<const std::uint8_t>(buf.data(), n));
    drain();
  }
  decoder.finish();
  drain();
  out.decoder = decoder.stats();
  return out;
}

namespace {

class FdSource final : public ByteSource {
 public:
  explicit FdSource(int fd) : fd_(fd) {}
  std::size_t read(std::span<std::uint8_t> out) override {
    for (;;) {
      const ssize_t n = ::recv(fd_, out.data(), out.size(), 0);
      if (n >= 0) return static_cast<std::size_t>(n);
      if (errno == EINTR) continue;
      return 0;
    }
  }

 private:
  int fd_;
};

}  // namespace

Collector::Collector(CollectorConfig config, CalibrationProfile profile, SampleSink& sink)
    : config_(std::move(config)), profile_(std::move(profile)), sink_(sink) {
  config_.divider.validate();
}

Collector::~Collector() { stop(); }

void Collector::start() {
  if (listen_fd_ >= 0) return;
  auto ai = resolve(config_.listen, true);
  int last_errno = 0;
  for (addrinfo* p = ai.get(); p != nullptr; p = p->ai_next) {
    const int fd = ::socket(p->ai_family, p->ai_socktype | SOCK_CLOEXEC, p->ai_protocol);
    if (fd < 0) {
      last_errno = errno;
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, p->ai_addr, p->ai_addrlen) == 0 && ::listen(fd, 16) == 0) {
      sockaddr_storage addr{};
      socklen_t len = sizeof addr;
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
      if (addr.ss_family == AF_INET) {
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
      } else {
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
      }
      listen_fd_ = fd;
      break;
    }
    last_errno = errno;
    ::close(fd);
  }
  if (listen_fd_ < 0) {
    errno = last_errno;
    throw net_error("cannot listen on " + config_.listen.to_string());
  }
  stopping_ = false;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Collector::accept_loop() {
  while (!stopping_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, 50);
    if (rc <= 0) continue;
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    ++stats_.connections_accepted;
    open_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve(fd); });
  }
}

void Collector::serve(int fd) {
  FdSource source(fd);
  ConnectionStats cs;
  try {
    cs = run_pipeline(source, sink_, tracker_, profile_, config_.divider);
  } catch (const std::exception&) {
    // A sink failure ends this connection only.
  }
  {
    std::lock_guard lock(mu_);
    std::erase(open_fds_, fd);
    ::close(fd);
    ++stats_.connections_closed;
    stats_.resync_events += cs.decoder.resync_events;
    stats_.skipped_bytes += cs.decoder.skipped_bytes;
  }
  closed_cv_.notify_all();
}

bool Collector::wait_for_closed(std::size_t n, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  return closed_cv_.wait_for(lock, timeout, [&] { return stats_.connections_closed >= n; });
}

void Collector::stop() {
  if (listen_fd_ < 0) return;
  stopping_ = true;
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
}

CollectorStats Collector::stats() const {
  std::lock_guard lock(mu_);
  CollectorStats s = stats_;
  s.devices = tracker_.snapshot();
  return s;
}

}  // namespace solesense
