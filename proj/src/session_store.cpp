#include "solesense/session_store.hpp"

#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"

namespace solesense {

bool SessionHeader::operator==(const SessionHeader& o) const {
  return device_id == o.device_id && epoch == o.epoch && profile == o.profile &&
         sample_rate_hz == o.sample_rate_hz && divider.v_in == o.divider.v_in &&
         divider.r1_ohm == o.divider.r1_ohm && divider.adc_bits == o.divider.adc_bits &&
         divider.v_ref == o.divider.v_ref && divider.battery_v == o.divider.battery_v;
}

bool is_rfc3339(std::string_view s) {
  static const std::regex re(
      R"(^\d{4}-(0[1-9]|1[0-2])-(0[1-9]|[12]\d|3[01])[Tt ]([01]\d|2[0-3]):[0-5]\d:([0-5]\d|60)(\.\d+)?([Zz]|[+-]([01]\d|2[0-3]):[0-5]\d)$)");
  return std::regex_match(s.begin(), s.end(), re);
}

void SessionHeader::validate() const {
  if (!is_rfc3339(epoch)) throw Error(ErrorKind::Parse, "epoch '" + epoch + "' is not RFC 3339");
  divider.validate();
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorKind::Parse, "sample rate must be > 0");
  if (profile.empty() || profile.find('\n') != std::string::npos) {
    throw Error(ErrorKind::Parse, "profile name must be a single non-empty line");
  }
}

namespace {

std::vector<std::pair<std::string, std::string>> header_fields(const SessionHeader& h) {
  return {
      {"format", "solesense-session-v1"},
      {"device_id", std::to_string(h.device_id)},
      {"epoch", h.epoch},
      {"v_in", format_double(h.divider.v_in)},
      {"r1_ohm", format_double(h.divider.r1_ohm)},
      {"adc_bits", std::to_string(h.divider.adc_bits)},
      {"v_ref", format_double(h.divider.v_ref)},
      {"battery_v", format_double(h.divider.battery_v)},
      {"profile", h.profile},
      {"sample_rate_hz", format_double(h.sample_rate_hz)},
  };
}

SessionHeader header_from_fields(const std::map<std::string, std::string>& kv, std::size_t line) {
  auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(line, std::string("header is missing '") + key + "'");
    return it->second;
  };
  SessionHeader h;
  try {
    if (get("format") != "solesense-session-v1") {
      throw Error(ErrorKind::Parse, "unsupported format '" + get("format") + "'");
    }
    const long long dev = parse_int(get("device_id"));
    if (dev < 0 || dev > 255) throw Error(ErrorKind::Parse, "device_id out of range");
    h.device_id = static_cast<std::uint8_t>(dev);
    h.epoch = get("epoch");
    h.divider.v_in = parse_double(get("v_in"));
    h.divider.r1_ohm = parse_double(get("r1_ohm"));
    h.divider.adc_bits = static_cast<int>(parse_int(get("adc_bits")));
    h.divider.v_ref = parse_double(get("v_ref"));
    if (kv.count("battery_v")) h.divider.battery_v = parse_double(kv.at("battery_v"));
    h.profile = get("profile");
    h.sample_rate_hz = parse_double(get("sample_rate_hz"));
    h.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line, e.what());
  }
  return h;
}

std::string header_block(const SessionHeader& h) {
  std::string out;
  for (const auto& [k, v] : header_fields(h)) out += "# " + k + ": " + v + "\n";
  out += kSessionCsvColumns;
  out += '\n';
  return out;
}

PressureSample parse_sample_cells(const std::vector<std::string>& cells) {
  PressureSample s;
  s.timestamp_s = parse_double(cells[0]);
  for (std::size_t c = 0; c < kChannelCount; ++c) s.channels[c] = Pressure(parse_double(cells[c + 1]));
  return s;
}

void check_order(const std::vector<PressureSample>& samples, const PressureSample& s) {
  if (!samples.empty() && !(s.timestamp_s > samples.back().timestamp_s)) {
    throw Error(ErrorKind::Parse, "sample time " + format_double(s.timestamp_s) +
                                      " does not follow " +
                                      format_double(samples.back().timestamp_s));
  }
}

}  // namespace

std::string format_session_csv_line(const PressureSample& s) {
  std::string line = format_double(s.timestamp_s);
  for (const auto& p : s.channels) {
    line += ',';
    line += format_double(p.pascals());
  }
  line += '\n';
  return line;
}

void write_csv(const SessionLog& log, const std::string& path) {
  log.header.validate();
  std::string out = header_block(log.header);
  for (const auto& s : log.samples) out += format_session_csv_line(s);
  write_text_file(path, out);
}

SessionLog read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  SessionLog log;
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  bool columns_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (!columns_seen) {
      if (line.rfind("# ", 0) == 0) {
        const auto colon = line.find(": ");
        if (colon == std::string::npos) throw ParseError(line_no, "header line lacks 'key: value'");
        kv[line.substr(2, colon - 2)] = line.substr(colon + 2);
        continue;
      }
      if (line != kSessionCsvColumns) {
        throw ParseError(line_no, "expected column header '" + std::string(kSessionCsvColumns) + "'");
      }
      log.header = header_from_fields(kv, line_no);
      columns_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != kChannelCount + 1) {
      throw ParseError(line_no, "expected " + std::to_string(kChannelCount + 1) + " columns, got " +
                                    std::to_string(cells.size()));
    }
    try {
      auto s = parse_sample_cells(cells);
      check_order(log.samples, s);
      log.samples.push_back(s);
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!columns_seen) throw ParseError(line_no + 1, "missing column header");
  return log;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson header_json(const SessionHeader& h) {
  ojson j;
  j["type"] = "header";
  for (const auto& [k, v] : header_fields(h)) j[k] = v;
  return j;
}

ojson sample_json(const PressureSample& s) {
  ojson j;
  j["type"] = "sample";
  j["t"] = s.timestamp_s;
  auto p = ojson::array();
  for (const auto& c : s.channels) p.push_back(c.pascals());
  j["p"] = std::move(p);
  return j;
}

ojson event_json(const GaitEvent& e) {
  ojson j;
  j["type"] = "event";
  j["kind"] = std::string(event_kind_name(e.kind));
  j["phase"] = std::string(phase_name(e.phase));
  j["t"] = e.timestamp_s;
  j["cycle"] = e.cycle_index;
  return j;
}

}  // namespace

void write_jsonl(const SessionLog& log, const std::string& path) {
  log.header.validate();
  std::string out = header_json(log.header).dump() + "\n";
  for (const auto& s : log.samples) out += sample_json(s).dump() + "\n";
  for (const auto& e : log.events) out += event_json(e).dump() + "\n";
  if (log.report) {
    auto j = ojson::parse(report_to_json(*log.report, -1));
    ojson line;
    line["type"] = "report";
    line["report"] = std::move(j);
    out += line.dump() + "\n";
  }
  write_text_file(path, out);
}

SessionLog read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  SessionLog log;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (!header_seen) {
        if (type != "header") throw Error(ErrorKind::Parse, "first line must be the header object");
        std::map<std::string, std::string> kv;
        for (const auto& [k, v] : j.items()) {
          if (k != "type") kv[k] = v.get<std::string>();
        }
        log.header = header_from_fields(kv, line_no);
        header_seen = true;
      } else if (type == "sample") {
        PressureSample s;
        s.timestamp_s = j.at("t").get<double>();
        const auto& p = j.at("p");
        if (p.size() != kChannelCount) throw Error(ErrorKind::Parse, "sample needs 5 pressures");
        for (std::size_t c = 0; c < kChannelCount; ++c) s.channels[c] = Pressure(p.at(c).get<double>());
        check_order(log.samples, s);
        log.samples.push_back(s);
      } else if (type == "event") {
        const auto kind = event_kind_from_name(j.at("kind").get<std::string>());
        const auto phase = phase_from_name(j.at("phase").get<std::string>());
        if (!kind || !phase) throw Error(ErrorKind::Parse, "unknown event kind or phase");
        log.events.push_back({*kind, *phase, j.at("t").get<double>(), j.at("cycle").get<std::uint32_t>()});
      } else if (type == "report") {
        log.report = report_from_json(j.at("report").dump());
      } else {
        throw Error(ErrorKind::Parse, "unknown record type '" + type + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!header_seen) throw ParseError(line_no + 1, "missing header line");
  return log;
}

namespace {

bool has_jsonl_extension(const std::string& path) {
  return path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0;
}

}  // namespace

void write_session(const SessionLog& log, const std::string& path) {
  has_jsonl_extension(path) ? write_jsonl(log, path) : write_csv(log, path);
}

SessionLog read_session(const std::string& path) {
  return has_jsonl_extension(path) ? read_jsonl(path) : read_csv(path);
}

SessionCsvWriter::SessionCsvWriter(const std::string& path, const SessionHeader& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(ErrorKind::Io, "cannot write " + path);
  header.validate();
  write_line(header_block(header));
}

void SessionCsvWriter::write_line(const std::string& line) {
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) throw Error(ErrorKind::Io, "write failed: " + path_);
}

void SessionCsvWriter::append(const PressureSample& sample) {
  write_line(format_session_csv_line(sample));
  ++count_;
}

void SessionCsvWriter::flush() { out_.flush(); }

std::vector<LegacyRecord> read_legacy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<LegacyRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "time_s,pressure_pa,resistance_ohm") {
        throw ParseError(line_no, "expected header 'time_s,pressure_pa,resistance_ohm'");
      }
      header_seen = true;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw ParseError(line_no, "expected 3 columns");
    try {
      LegacyRecord r{parse_double(cells[0]), parse_double(cells[1]), parse_double(cells[2])};
      // Ties in time keep the first occurrence.
      if (!out.empty() && r.time_s == out.back().time_s) continue;
      if (!out.empty() && r.time_s < out.back().time_s) {
        throw Error(ErrorKind::Parse, "time goes backwards");
      }
      out.push_back(r);
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!header_seen) throw ParseError(line_no + 1, "missing header");
  return out;
}

InputKind detect_input_kind(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '{') return InputKind::SessionJsonl;
    if (line.rfind("# format: solesense-session-v1", 0) == 0) return InputKind::SessionCsv;
    if (line[0] == '#') continue;
    if (line == kSessionCsvColumns) return InputKind::SessionCsv;
    if (line == "time_s,pressure_pa,resistance_ohm") return InputKind::LegacyTimeSeries;
    if (line == "pressure_pa,resistance_ohm") return InputKind::Calibration;
    return InputKind::Unknown;
  }
  return InputKind::Unknown;
}

}  // namespace solesense
