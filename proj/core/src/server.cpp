#include "seg/server.hpp"

#include <condition_variable>
#include <deque>
#include <thread>
#include <vector>

#include <boost/asio/bind_executor.hpp>
#include <boost/asio/dispatch.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace seg {
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

std::vector<std::string_view> split_path(std::string_view target) {
  if (const auto q = target.find('?'); q != std::string_view::npos) target = target.substr(0, q);
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos < target.size()) {
    const auto next = target.find('/', pos);
    const auto end = next == std::string_view::npos ? target.size() : next;
    if (end > pos) parts.push_back(target.substr(pos, end - pos));
    pos = end + 1;
  }
  return parts;
}

HttpResult error(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

// Returns the session id when `target` is /sessions/{id}/stream.
std::optional<std::string> stream_target(std::string_view target) {
  const auto parts = split_path(target);
  if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "stream") {
    return std::string(parts[1]);
  }
  return std::nullopt;
}

}  // namespace

HttpResult route_request(SessionManager& sessions, std::string_view method,
                         std::string_view target, const std::string& body) {
  const auto parts = split_path(target);
  if (parts.empty() || parts[0] != "sessions") return error(404, "no such resource");
  try {
    auto parse_body = [&]() {
      if (body.empty()) return nlohmann::json::object();
      try {
        return nlohmann::json::parse(body);
      } catch (const nlohmann::json::parse_error& e) {
        throw SessionError(400, std::string("malformed JSON: ") + e.what());
      }
    };
    if (parts.size() == 1) {
      if (method != "POST") return error(405, "use POST /sessions");
      return {201, sessions.create_session(parse_body())};
    }
    const std::string id(parts[1]);
    if (parts.size() == 2) {
      if (method != "GET") return error(405, "use GET /sessions/{id}");
      return {200, sessions.get(id)};
    }
    if (parts.size() == 3 && parts[2] == "moves") {
      if (method != "POST") return error(405, "use POST /sessions/{id}/moves");
      return {200, sessions.submit_move(id, parse_body())};
    }
    if (parts.size() == 3 && parts[2] == "stream") {
      return error(426, "the stream endpoint needs a WebSocket upgrade");
    }
    return error(404, "no such resource");
  } catch (const SessionError& e) {
    return error(e.status(), e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

namespace {

class StreamSession : public std::enable_shared_from_this<StreamSession> {
 public:
  StreamSession(tcp::socket&& socket, std::shared_ptr<SessionManager> sessions, std::string id)
      : ws_(std::move(socket)), sessions_(std::move(sessions)), id_(std::move(id)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&StreamSession::on_accept, shared_from_this()));
  }

  void send(std::string message) {
    net::post(ws_.get_executor(), [self = shared_from_this(), msg = std::move(message)]() mutable {
      self->queue_.push_back(std::move(msg));
      if (self->queue_.size() == 1) self->write_next();
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<StreamSession> weak = shared_from_this();
    try {
      token_ = sessions_->subscribe(id_, [weak](const nlohmann::json& payload) {
        if (auto self = weak.lock()) self->send(payload.dump());
      });
      send(sessions_->get(id_).dump());
    } catch (const std::exception&) {
      ws_.async_close(websocket::close_code::policy_error, [self = shared_from_this()](auto) {});
      return;
    }
    read_next();
  }

  void read_next() {
    ws_.async_read(buffer_, beast::bind_front_handler(&StreamSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      sessions_->unsubscribe(id_, token_);
      return;
    }
    buffer_.consume(buffer_.size());
    read_next();
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()),
                    beast::bind_front_handler(&StreamSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      queue_.clear();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) write_next();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::shared_ptr<SessionManager> sessions_;
  std::string id_;
  std::size_t token_ = 0;
  std::deque<std::string> queue_;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, std::shared_ptr<SessionManager> sessions)
      : stream_(std::move(socket)), sessions_(std::move(sessions)) {}

  void run() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpConnection::read_next, shared_from_this()));
  }

 private:
  void read_next() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(60));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) return close();
    if (ec) return;

    if (websocket::is_upgrade(req_)) {
      if (auto id = stream_target(std::string(req_.target())); id && sessions_->contains(*id)) {
        stream_.expires_never();
        std::make_shared<StreamSession>(stream_.release_socket(), sessions_, *id)
            ->run(std::move(req_));
        return;
      }
      return respond(error(404, "no such session stream"));
    }
    if (req_.method() == http::verb::options) return respond({204, nullptr});
    respond(route_request(*sessions_, std::string(req_.method_string()),
                          std::string(req_.target()), req_.body()));
  }

  void respond(const HttpResult& result) {
    auto res = std::make_shared<http::response<http::string_body>>(
        static_cast<http::status>(result.status), req_.version());
    res->set(http::field::server, "seg");
    res->set(http::field::access_control_allow_origin, "*");
    res->set(http::field::access_control_allow_headers, "Content-Type");
    res->set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
    if (!result.body.is_null()) {
      res->set(http::field::content_type, "application/json");
      res->body() = result.body.dump();
    }
    res->keep_alive(req_.keep_alive());
    res->prepare_payload();
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (!res->keep_alive()) return self->close();
                        self->read_next();
                      });
  }

  void close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<SessionManager> sessions_;
};

}  // namespace

struct Server::Impl {
  std::shared_ptr<SessionManager> sessions;
  ServerOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor{ioc};
  std::vector<std::thread> threads;
  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool stop_requested = false;
  bool shut_down = false;
  std::unique_ptr<net::signal_set> signals;

  void request_stop() {
    {
      std::lock_guard lock(mutex);
      stop_requested = true;
    }
    stopped_cv.notify_all();
  }

  void accept_next() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) {
        if (ec == net::error::operation_aborted) return;
      } else {
        std::make_shared<HttpConnection>(std::move(socket), sessions)->run();
      }
      accept_next();
    });
  }
};

Server::Server(std::shared_ptr<SessionManager> sessions, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->sessions = std::move(sessions);
  impl_->options = std::move(options);
}

Server::~Server() { stop(); }

unsigned short Server::start() {
  const tcp::endpoint endpoint(net::ip::make_address(impl_->options.address),
                               impl_->options.port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen(net::socket_base::max_listen_connections);
  impl_->accept_next();
  if (impl_->options.handle_signals) {
    impl_->signals = std::make_unique<net::signal_set>(impl_->ioc, SIGINT, SIGTERM);
    impl_->signals->async_wait([this](beast::error_code, int) { impl_->request_stop(); });
  }
  const int n = std::max(1, impl_->options.threads);
  for (int k = 0; k < n; ++k) impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  return impl_->acceptor.local_endpoint().port();
}

void Server::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stop_requested; });
}

void Server::stop() {
  impl_->request_stop();
  {
    std::lock_guard lock(impl_->mutex);
    if (impl_->shut_down) return;
    impl_->shut_down = true;
  }
  net::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
  });
  impl_->ioc.stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->stopped_cv.notify_all();
}

}  // namespace seg
