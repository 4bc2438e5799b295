#pragma once

#include <memory>
#include <string>

#include "readtrace/study.hpp"

namespace readtrace {

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Routes of the annotation API, independent of any socket:
//   POST /sessions                               {participant_id, client_epoch_ms?}
//   GET  /sessions/{sid}
//   POST /sessions/{sid}/trials/{k}/events       {seq, events: [...]}
//   POST /sessions/{sid}/trials/{k}/annotation   {choice, rationale}
//   GET  /export                                 line-delimited trial records
// Errors come back as {"error": kind, "message": ..., "index"?: n} with
// status 400 (validation), 404 (not found), 409 (conflict) or 503 (capacity).
class StudyApi {
 public:
  explicit StudyApi(StudyService& service) : service_(service) {}

  HttpReply handle(const std::string& method, const std::string& path, const std::string& body);

 private:
  HttpReply dispatch(const std::string& method, const std::string& path, const std::string& body);

  StudyService& service_;
};

// StudyApi served over HTTP.
class StudyHttpServer {
 public:
  explicit StudyHttpServer(StudyService& service);
  ~StudyHttpServer();

  StudyHttpServer(const StudyHttpServer&) = delete;
  StudyHttpServer& operator=(const StudyHttpServer&) = delete;

  // Returns the bound port, or -1 on failure.
  int bind_to_any_port(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);
  // Blocks until stop() is called.
  bool listen();
  void stop();
  bool running() const;
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace readtrace
