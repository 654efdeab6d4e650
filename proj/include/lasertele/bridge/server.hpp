#pragma once

// WebSocket bridge: one network thread (Boost.Asio/Beast) and one tick
// thread. The tick thread owns the LiveSession; the network thread owns every
// connection. They meet only at the InputMailbox and at posted snapshot text.

#include "lasertele/bridge/live.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <thread>

namespace lasertele {

struct ServeOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  int max_observers = 8;       // read-only clients beyond the controller
  std::size_t send_queue = 64; // snapshots buffered per client before dropping
};

class BridgeServer {
 public:
  BridgeServer(LiveSession& live, ServeOptions opt)
      : live_(live),
        opt_(std::move(opt)),
        acceptor_(ioc_),
        scenario_name_(live.spec().scenario.name),
        tick_rate_(live.spec().config.tick_rate) {}
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;
  ~BridgeServer() { stop(); }

  /// Binds and starts both threads. Throws if the address cannot be bound.
  void start() {
    namespace asio = boost::asio;
    asio::ip::tcp::endpoint ep(asio::ip::make_address(opt_.address), opt_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
    do_accept();
    io_thread_ = std::thread([this] { ioc_.run(); });
    tick_thread_ = std::thread([this] { tick_loop(); });
  }

  /// Stops ticking, closes every connection and joins both threads.
  void stop() {
    if (stopping_.exchange(true)) return;
    if (tick_thread_.joinable()) tick_thread_.join();
    boost::asio::post(ioc_, [this] {
      boost::system::error_code ec;
      acceptor_.close(ec);
      for (auto& c : conns_) boost::beast::get_lowest_layer(c->ws).socket().close(ec);
      conns_.clear();
      controller_.reset();
    });
    guard_.reset();
    if (io_thread_.joinable()) io_thread_.join();
  }

  unsigned short port() const { return port_; }
  std::uint64_t ticks() const { return ticks_.load(); }
  InputMailbox& mailbox() { return mailbox_; }

 private:
  struct Conn {
    explicit Conn(boost::asio::ip::tcp::socket s) : ws(std::move(s)) {}
    boost::beast::websocket::stream<boost::beast::tcp_stream> ws;
    boost::beast::flat_buffer buffer;
    std::deque<std::string> out;
    bool writing = false;
    bool greeted = false;
    bool close_after_flush = false;
    bool dead = false;
    std::string role;
  };
  using ConnPtr = std::shared_ptr<Conn>;

  void tick_loop() {
    using clock = std::chrono::steady_clock;
    auto next = clock::now();
    while (!stopping_) {
      LiveStep step = live_.step(mailbox_.drain());
      std::string text = wire::serialize(step.snapshot);
      // A load may change the scenario and its tick rate.
      double rate = live_.spec().config.tick_rate;
      const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / rate));
      boost::asio::post(ioc_, [this, text = std::move(text), errors = std::move(step.errors),
                               name = step.snapshot.scenario, rate] {
        scenario_name_ = name;
        tick_rate_ = rate;
        for (auto& c : conns_)
          if (c->greeted) send(c, text, true);
        if (auto c = controller_.lock())
          for (const auto& e : errors) send(c, wire::error(e), false);
      });
      ++ticks_;
      next += period;
      auto now = clock::now();
      if (next < now - period) next = now;  // fell behind: do not burst
      std::this_thread::sleep_until(next);
    }
  }

  void do_accept() {
    acceptor_.async_accept([this](boost::system::error_code ec, boost::asio::ip::tcp::socket s) {
      if (ec) return;  // acceptor closed
      auto c = std::make_shared<Conn>(std::move(s));
      c->ws.text(true);
      c->ws.async_accept([this, c](boost::system::error_code ec2) {
        if (ec2) return;
        conns_.push_back(c);
        do_read(c);
      });
      do_accept();
    });
  }

  void do_read(const ConnPtr& c) {
    c->ws.async_read(c->buffer, [this, c](boost::system::error_code ec, std::size_t) {
      if (ec) {
        drop(c);
        return;
      }
      std::string text = boost::beast::buffers_to_string(c->buffer.data());
      c->buffer.consume(c->buffer.size());
      on_message(c, text);
      if (!c->dead && !c->close_after_flush) do_read(c);
    });
  }

  void on_message(const ConnPtr& c, const std::string& text) {
    wire::InputMessage msg;
    try {
      msg = wire::parse_input(text);
    } catch (const wire::SchemaError& e) {
      send(c, wire::error(e.what()), false);
      if (!c->greeted) c->close_after_flush = true;
      return;
    }
    if (!c->greeted) {
      auto* hello = std::get_if<wire::Hello>(&msg);
      if (!hello) {
        send(c, wire::error("first message must be hello"), false);
        c->close_after_flush = true;
        return;
      }
      std::string role = "observe";
      if (hello->role == "control" && controller_.expired()) role = "control";
      if (role == "observe" && observers() >= opt_.max_observers) {
        send(c, wire::error("read-only client limit reached"), false);
        c->close_after_flush = true;
        return;
      }
      c->role = role;
      c->greeted = true;
      if (role == "control") controller_ = c;
      send(c, wire::welcome(role, scenario_name_, tick_rate_), false);
      return;
    }
    if (std::holds_alternative<wire::Hello>(msg)) {
      send(c, wire::error("hello already received"), false);
      return;
    }
    if (c->role != "control") {
      send(c, wire::error("read-only client: input ignored"), false);
      return;
    }
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, wire::SessionControl>) {
            if (!mailbox_.post(m)) send(c, wire::error("session_control queue full"), false);
          } else if constexpr (!std::is_same_v<T, wire::Hello>) {
            mailbox_.post(m);
          }
        },
        msg);
  }

  int observers() const {
    int n = 0;
    for (const auto& c : conns_) n += c->greeted && c->role == "observe";
    return n;
  }

  void send(const ConnPtr& c, std::string text, bool droppable) {
    if (c->dead) return;
    if (droppable && c->out.size() >= opt_.send_queue) return;
    c->out.push_back(std::move(text));
    if (!c->writing) do_write(c);
  }

  void do_write(const ConnPtr& c) {
    c->writing = true;
    c->ws.async_write(boost::asio::buffer(c->out.front()), [this, c](boost::system::error_code ec, std::size_t) {
      c->writing = false;
      if (ec) {
        drop(c);
        return;
      }
      c->out.pop_front();
      if (!c->out.empty()) {
        do_write(c);
      } else if (c->close_after_flush) {
        c->ws.async_close(boost::beast::websocket::close_code::policy_error,
                          [this, c](boost::system::error_code) { drop(c); });
      }
    });
  }

  void drop(const ConnPtr& c) {
    if (c->dead) return;
    c->dead = true;
    if (controller_.lock() == c) {
      controller_.reset();
      mailbox_.release();
    }
    std::erase(conns_, c);
    boost::system::error_code ec;
    boost::beast::get_lowest_layer(c->ws).socket().close(ec);
  }

  LiveSession& live_;
  ServeOptions opt_;
  InputMailbox mailbox_;
  boost::asio::io_context ioc_;
  boost::asio::executor_work_guard<boost::asio::io_context::executor_type> guard_{ioc_.get_executor()};
  boost::asio::ip::tcp::acceptor acceptor_;
  // Network thread only.
  std::string scenario_name_;
  double tick_rate_;
  std::vector<ConnPtr> conns_;
  std::weak_ptr<Conn> controller_;

  std::thread io_thread_, tick_thread_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> ticks_{0};
  unsigned short port_ = 0;
};

}  // namespace lasertele
