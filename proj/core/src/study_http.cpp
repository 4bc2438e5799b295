#include "readtrace/study_http.hpp"

#include <charconv>
#include <vector>

#include "httplib.h"
#include "json_util.hpp"

namespace readtrace {

using detail::json;
using detail::ordered_json;

namespace {

HttpReply json_reply(int status, const ordered_json& body) {
  return HttpReply{status, detail::dump(body), "application/json"};
}

HttpReply error_reply(int status, std::string_view kind, std::string_view message,
                      std::optional<std::size_t> index = std::nullopt) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  if (index) j["index"] = *index;
  return json_reply(status, j);
}

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  const auto query = path.find('?');
  if (query != std::string_view::npos) path = path.substr(0, query);
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto slash = path.find('/', start);
    const auto end = slash == std::string_view::npos ? path.size() : slash;
    if (end > start) parts.push_back(path.substr(start, end - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return parts;
}

std::size_t parse_index(std::string_view text) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw NotFoundError("no trial '" + std::string(text) + "'");
  }
  return value;
}

ordered_json session_json(const SessionInfo& s, const StudyService& service) {
  ordered_json j;
  j["session_id"] = s.session_id;
  j["participant_id"] = s.participant_id;
  j["client_epoch_ms"] = s.client_epoch_ms;
  j["cursor"] = s.cursor;
  j["expired"] = s.expired;
  ordered_json trials = ordered_json::array();
  for (const SessionTrialInfo& t : s.trials) {
    const TokenizedStimulus& stim = service.stimulus(t.stimulus_id);
    ordered_json tj;
    tj["index"] = t.index;
    tj["trial_id"] = t.trial_id;
    tj["stimulus_id"] = t.stimulus_id;
    tj["order"] = t.index;
    tj["layout"] = to_string(t.layout);
    tj["annotated"] = t.annotated;
    tj["prompt"] = stim.text(Section::Prompt);
    tj["response_a"] = stim.text(Section::ResponseA);
    tj["response_b"] = stim.text(Section::ResponseB);
    trials.push_back(std::move(tj));
  }
  j["trials"] = std::move(trials);
  return j;
}

std::vector<HoverEvent> parse_events(const json& body) {
  const json& events = detail::field(body, "events", "event batch");
  if (!events.is_array()) throw ValidationError("event batch: 'events' must be an array");
  std::vector<HoverEvent> out;
  out.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    try {
      if (!events[i].is_object()) throw ValidationError("event must be an object");
      out.push_back(detail::event_from_json(events[i]));
    } catch (const ValidationError& e) {
      throw ValidationError("event " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  return out;
}

}  // namespace

HttpReply StudyApi::handle(const std::string& method, const std::string& path,
                           const std::string& body) {
  try {
    return dispatch(method, path, body);
  } catch (const ValidationError& e) {
    return error_reply(400, "validation", e.what(), e.index());
  } catch (const NotFoundError& e) {
    return error_reply(404, "not_found", e.what());
  } catch (const ConflictError& e) {
    return error_reply(409, "conflict", e.what());
  } catch (const CapacityError& e) {
    return error_reply(503, "capacity", e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "internal", e.what());
  }
}

HttpReply StudyApi::dispatch(const std::string& method, const std::string& path,
                             const std::string& body) {
  const auto parts = split_path(path);
  const auto body_json = [&] {
    json j = detail::parse_json(body, "request body");
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
  };

  if (parts.size() == 1 && parts[0] == "export") {
    if (method != "GET") return error_reply(405, "method_not_allowed", "use GET");
    return HttpReply{200, service_.export_jsonl(), "application/x-ndjson"};
  }
  if (parts.empty() || parts[0] != "sessions") {
    return error_reply(404, "not_found", "no route for " + path);
  }
  if (parts.size() == 1) {
    if (method != "POST") return error_reply(405, "method_not_allowed", "use POST");
    const json j = body_json();
    const std::string participant = detail::string_field(j, "participant_id", "session request");
    if (participant.empty()) throw ValidationError("session request: empty participant_id");
    const std::int64_t epoch =
        j.contains("client_epoch_ms") ? detail::int_field(j, "client_epoch_ms", "session request")
                                      : 0;
    return json_reply(201, session_json(service_.create_session(participant, epoch), service_));
  }
  const std::string session_id(parts[1]);
  if (parts.size() == 2) {
    if (method != "GET") return error_reply(405, "method_not_allowed", "use GET");
    return json_reply(200, session_json(service_.session(session_id), service_));
  }
  if (parts.size() == 5 && parts[2] == "trials") {
    const std::size_t trial = parse_index(parts[3]);
    if (method != "POST") return error_reply(405, "method_not_allowed", "use POST");
    if (parts[4] == "events") {
      const json j = body_json();
      const std::uint64_t seq = detail::uint_field(j, "seq", "event batch");
      const IngestAck ack = service_.ingest_events(session_id, trial, seq, parse_events(j));
      return json_reply(200, ordered_json{{"stored", ack.stored}, {"duplicate", ack.duplicate}});
    }
    if (parts[4] == "annotation") {
      const json j = body_json();
      const json& choice = detail::field(j, "choice", "annotation");
      if (!choice.is_string()) throw ValidationError("annotation: 'choice' must be a string");
      const Choice c = parse_choice(choice.get<std::string>());
      const Rationale r = parse_rationale(detail::string_field(j, "rationale", "annotation"));
      const AnnotationAck ack = service_.record_annotation(session_id, trial, c, r);
      return json_reply(200, ordered_json{{"cursor", ack.cursor},
                                          {"complete", ack.complete},
                                          {"flagged_for_review", ack.flagged_for_review}});
    }
  }
  return error_reply(404, "not_found", "no route for " + path);
}

struct StudyHttpServer::Impl {
  explicit Impl(StudyService& service) : api(service) {
    const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      const HttpReply reply = api.handle(req.method, req.path, req.body);
      res.status = reply.status;
      res.set_content(reply.body, reply.content_type);
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
  }

  StudyApi api;
  httplib::Server server;
};

StudyHttpServer::StudyHttpServer(StudyService& service) : impl_(std::make_unique<Impl>(service)) {}

StudyHttpServer::~StudyHttpServer() { stop(); }

int StudyHttpServer::bind_to_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool StudyHttpServer::bind(const std::string& host, int port) {
  return impl_->server.bind_to_port(host, port);
}

bool StudyHttpServer::listen() { return impl_->server.listen_after_bind(); }

void StudyHttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool StudyHttpServer::running() const { return impl_->server.is_running(); }

void StudyHttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace readtrace
