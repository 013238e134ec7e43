#include <doctest.h>

#include <cstdlib>
#include <thread>

#include "solesense/telemetry_net.hpp"

using namespace solesense;

namespace {

std::vector<PressureSample> walk(std::uint32_t cycles, std::uint64_t seed = 0, double noise = 0.0) {
  GaitParams p;
  p.cycles = cycles;
  p.seed = seed;
  p.noise_sigma_pa = noise;
  return synthesize(p);
}

// Records every frame; fails the send with index `fail_at` once.
class FlakyTransport final : public FrameTransport {
 public:
  explicit FlakyTransport(std::optional<std::size_t> fail_at) : fail_at_(fail_at) {}
  void connect() override {
    ++connects;
    if (refuse_connects > 0) {
      --refuse_connects;
      throw Error(ErrorKind::Network, "refused");
    }
  }
  void send(std::span<const std::uint8_t> bytes) override {
    if (fail_at_ && attempts_++ == *fail_at_) throw Error(ErrorKind::Network, "link dropped");
    frames.push_back(decode(bytes));
  }
  void close() override {}

  int connects = 0;
  int refuse_connects = 0;
  std::vector<TelemetryFrame> frames;

 private:
  std::optional<std::size_t> fail_at_;
  std::size_t attempts_ = 0;
};

EmitterConfig quiet_config(std::vector<std::chrono::milliseconds>* delays = nullptr) {
  EmitterConfig c;
  c.sleep = [delays](std::chrono::milliseconds d) {
    if (delays != nullptr) delays->push_back(d);
  };
  return c;
}

}  // namespace

TEST_CASE("endpoint parsing") {
  const auto a = Endpoint::parse("10.0.0.2:9000");
  CHECK(a.host == "10.0.0.2");
  CHECK(a.port == 9000);
  const auto b = Endpoint::parse(":1234");
  CHECK(b.host == "127.0.0.1");
  CHECK(b.port == 1234);
  CHECK(Endpoint::parse("localhost").port == kDefaultPort);
  CHECK_THROWS_AS(Endpoint::parse("host:99999"), Error);
  CHECK_THROWS_AS(Endpoint::parse("host:abc"), Error);
}

TEST_CASE("backoff doubles up to the cap") {
  using ms = std::chrono::milliseconds;
  CHECK(backoff_delay(0, ms(100), ms(5000)) == ms(100));
  CHECK(backoff_delay(1, ms(100), ms(5000)) == ms(200));
  CHECK(backoff_delay(5, ms(100), ms(5000)) == ms(3200));
  CHECK(backoff_delay(6, ms(100), ms(5000)) == ms(5000));
  CHECK(backoff_delay(60, ms(100), ms(5000)) == ms(5000));
}

TEST_CASE("emitter numbers frames from zero") {
  const auto samples = walk(1);
  FlakyTransport t(std::nullopt);
  Emitter e(quiet_config(), t, specsheet_profile(), DividerConfig{});
  const auto stats = e.run(std::span(samples).first(100));
  REQUIRE(t.frames.size() == 100);
  for (std::uint32_t i = 0; i < 100; ++i) CHECK(t.frames[i].sequence == i);
  CHECK(stats.frames_sent == 100);
  CHECK(stats.next_sequence == 100);
}

TEST_CASE("sequence continues across a reconnect") {
  const auto samples = walk(1);
  FlakyTransport t(50);  // the 51st send (frame 50) fails
  t.refuse_connects = 0;
  std::vector<std::chrono::milliseconds> delays;
  Emitter e(quiet_config(&delays), t, specsheet_profile(), DividerConfig{});
  const auto stats = e.run(std::span(samples).first(100));
  CHECK(stats.reconnects == 1);
  CHECK(t.connects == 2);
  REQUIRE(t.frames.size() == 100);
  CHECK(t.frames[49].sequence == 49);
  CHECK(t.frames[50].sequence == 50);
}

TEST_CASE("connect retries back off and eventually give up") {
  const auto samples = walk(1);
  FlakyTransport t(std::nullopt);
  t.refuse_connects = 3;
  std::vector<std::chrono::milliseconds> delays;
  Emitter ok(quiet_config(&delays), t, specsheet_profile(), DividerConfig{});
  ok.run(std::span(samples).first(5));
  using ms = std::chrono::milliseconds;
  CHECK(delays == std::vector<ms>{ms(100), ms(200), ms(400)});

  FlakyTransport never(std::nullopt);
  never.refuse_connects = 1000;
  auto cfg = quiet_config();
  cfg.max_attempts = 4;
  Emitter e(cfg, never, specsheet_profile(), DividerConfig{});
  try {
    e.run(std::span(samples).first(5));
    FAIL("expected network error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::Network);
  }
  CHECK(never.connects == 4);
}

TEST_CASE("in-memory link conserves samples exactly") {
  const auto profile = specsheet_profile();
  const DividerConfig div;
  // Source pressures lie on acquisition's grid after one pass through the sensor path.
  auto source = walk(5, 3, 4000.0);
  auto channel = std::make_shared<ByteChannel>();
  InMemoryTransport transport(channel);
  MemorySink sink;
  SequenceTracker tracker;
  std::thread reader([&] { run_pipeline(*channel, sink, tracker, profile, div); });
  Emitter e(quiet_config(), transport, profile, div);
  e.run(source);
  reader.join();
  const auto got = sink.snapshot();
  REQUIRE(got.size() == 1);
  const auto& rx = got.at(1);
  REQUIRE(rx.size() == source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    const auto expected = frame_to_sample(make_frame(1, static_cast<std::uint32_t>(i), source[i], profile, div),
                                          profile, div);
    REQUIRE(rx[i].sample == expected);
    REQUIRE(rx[i].sequence == i);
  }
  CHECK(tracker.snapshot().at(1).gaps == 0);
}

TEST_CASE("pipeline counts corrupted frames as gaps") {
  const auto profile = specsheet_profile();
  const DividerConfig div;
  const auto source = walk(1);
  auto channel = std::make_shared<ByteChannel>();
  for (std::uint32_t i = 0; i < 60; ++i) {
    auto b = encode(make_frame(2, i, source[i], profile, div));
    if (i == 10 || i == 30 || i == 31 + 10) b[12] ^= 0x01;
    channel->write(b);
  }
  channel->close_write();
  MemorySink sink;
  SequenceTracker tracker;
  const auto cs = run_pipeline(*channel, sink, tracker, profile, div);
  CHECK(sink.total() == 57);
  CHECK(tracker.snapshot().at(2).gaps == 3);
  CHECK(cs.decoder.resync_events == 3);
  CHECK(cs.device_id == 2);
}

TEST_CASE("empty connection") {
  auto channel = std::make_shared<ByteChannel>();
  channel->close_write();
  MemorySink sink;
  SequenceTracker tracker;
  const auto cs = run_pipeline(*channel, sink, tracker, specsheet_profile(), DividerConfig{});
  CHECK(sink.total() == 0);
  CHECK(cs.decoder.resync_events == 0);
  CHECK_FALSE(cs.device_id.has_value());
}

TEST_CASE("loopback collector keeps concurrent devices apart") {
  const auto profile = specsheet_profile();
  const DividerConfig div;
  MemorySink sink;
  CollectorConfig cc;
  cc.listen = Endpoint::parse("127.0.0.1:0");
  Collector collector(cc, profile, sink);
  collector.start();
  REQUIRE(collector.port() != 0);
  const Endpoint target{"127.0.0.1", collector.port()};

  const auto a = walk(3, 1, 2000.0);
  const auto b = walk(4, 2, 2000.0);
  auto send = [&](std::uint8_t id, const std::vector<PressureSample>& s) {
    TcpClientTransport t(target);
    auto cfg = quiet_config();
    cfg.device_id = id;
    Emitter e(cfg, t, profile, div);
    e.run(s);
  };
  std::thread ta(send, 1, std::cref(a));
  std::thread tb(send, 2, std::cref(b));
  ta.join();
  tb.join();
  REQUIRE(collector.wait_for_closed(2, std::chrono::seconds(10)));
  collector.stop();

  const auto got = sink.snapshot();
  REQUIRE(got.size() == 2);
  for (auto [id, src] : {std::pair{1, &a}, std::pair{2, &b}}) {
    const auto& rx = got.at(static_cast<std::uint8_t>(id));
    REQUIRE(rx.size() == src->size());
    for (std::size_t i = 0; i < rx.size(); ++i) {
      REQUIRE(rx[i].sequence == i);
      REQUIRE(rx[i].sample.timestamp_s == (*src)[i].timestamp_s);
    }
  }
  const auto stats = collector.stats();
  CHECK(stats.connections_accepted == 2);
  CHECK(stats.devices.at(1).gaps == 0);
  CHECK(stats.devices.at(2).frames == b.size());
}

TEST_CASE("collector stops cleanly with idle connections open") {
  MemorySink sink;
  CollectorConfig cc;
  cc.listen = Endpoint::parse("127.0.0.1:0");
  Collector collector(cc, specsheet_profile(), sink);
  collector.start();
  TcpClientTransport idle({"127.0.0.1", collector.port()});
  idle.connect();
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  collector.stop();
  CHECK(sink.total() == 0);
  CHECK(collector.stats().connections_closed == 1);
}

TEST_CASE("nothing listening is a network error") {
  MemorySink sink;
  CollectorConfig cc;
  cc.listen = Endpoint::parse("127.0.0.1:0");
  std::uint16_t port = 0;
  {
    Collector c(cc, specsheet_profile(), sink);
    c.start();
    port = c.port();
  }
  TcpClientTransport t({"127.0.0.1", port});
  CHECK_THROWS_AS(t.connect(), Error);
}

TEST_CASE("SOLESENSE_ADDR selects the endpoint") {
  ::setenv("SOLESENSE_ADDR", "192.168.4.1:8000", 1);
  const auto ep = Endpoint::from_env();
  ::unsetenv("SOLESENSE_ADDR");
  CHECK(ep.host == "192.168.4.1");
  CHECK(ep.port == 8000);
  CHECK(Endpoint::from_env().port == kDefaultPort);
}
