#include "meshbed/runtime/live_runtime.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <optional>
#include <stdexcept>

namespace meshbed {

namespace {

void set_nonblocking(int fd) {
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

} // namespace

LiveRuntime::LiveRuntime(LiveConfig cfg)
    : cfg_(std::move(cfg)), t0_(std::chrono::steady_clock::now()), seed_rng_(cfg_.seed) {
    if (::pipe(wake_pipe_) != 0) {
        throw std::runtime_error("cannot create reactor wake pipe");
    }
    set_nonblocking(wake_pipe_[0]);
    set_nonblocking(wake_pipe_[1]);
    running_ = true;
    reactor_ = std::thread([this] { reactor_loop(); });
}

LiveRuntime::~LiveRuntime() {
    stop_all();
}

TimeMs LiveRuntime::now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0_)
        .count();
}

Peer& LiveRuntime::add_peer(PeerId id, std::uint16_t port, PeerletFactory factory) {
    std::lock_guard lock(peers_mu_);
    if (peers_.count(id) != 0) {
        throw std::invalid_argument("duplicate peer id " + std::to_string(id));
    }

    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) {
        throw std::runtime_error("cannot create listener socket");
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, cfg_.host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw std::runtime_error("bad live host: " + cfg_.host);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(fd, 128) != 0) {
        ::close(fd);
        throw std::runtime_error("cannot bind/listen on " + cfg_.host + ":" +
                                 std::to_string(port));
    }
    set_nonblocking(fd);

    auto rec = std::make_unique<PeerRec>();
    rec->listen_fd = fd;
    rec->port = port;
    rec->factory = std::move(factory);
    rec->peer = std::make_unique<Peer>(id, NetworkAddress::tcp(cfg_.host, port),
                                       ExecutionMode::Live, rec->factory(),
                                       cfg_.queue_capacity, cfg_.drop_policy);
    rec->peer->attach(*this, seed_rng_.fork(id));
    rec->executor = std::make_unique<Executor>();
    PeerRec* raw = rec.get();
    rec->executor->thread = std::thread([this, raw] { executor_loop(*raw); });
    peers_.emplace(id, std::move(rec));
    wake_reactor();
    return *peers_.at(id)->peer;
}

Peer& LiveRuntime::peer(PeerId id) {
    std::lock_guard lock(peers_mu_);
    const auto it = peers_.find(id);
    if (it == peers_.end()) {
        throw std::out_of_range("unknown peer id " + std::to_string(id));
    }
    return *it->second->peer;
}

void LiveRuntime::post(PeerRec& rec, std::function<void()> task) {
    {
        std::lock_guard lock(rec.executor->mu);
        rec.executor->tasks.push_back(std::move(task));
    }
    rec.executor->cv.notify_one();
}

void LiveRuntime::start_all() {
    // Descending id order: the scenario layout keeps infrastructure
    // (gateways) at the lowest ids, so every agent listens before the
    // gateway's announce goes out.
    std::vector<PeerRec*> order;
    {
        std::lock_guard lock(peers_mu_);
        for (auto it = peers_.rbegin(); it != peers_.rend(); ++it) {
            order.push_back(it->second.get());
        }
    }
    for (PeerRec* rec : order) {
        if (rec->peer->state() != PeerState::Init) {
            continue;
        }
        std::mutex done_mu;
        std::condition_variable done_cv;
        bool done = false;
        post(*rec, [rec, &done_mu, &done_cv, &done] {
            rec->peer->lifecycle_start();
            std::lock_guard lk(done_mu);
            done = true;
            done_cv.notify_one();
        });
        std::unique_lock lk(done_mu);
        done_cv.wait(lk, [&done] { return done; });
    }
}

void LiveRuntime::start_peer(PeerId id) {
    std::lock_guard lock(peers_mu_);
    auto& rec = *peers_.at(id);
    post(rec, [&rec] { rec.peer->lifecycle_start(); });
}

void LiveRuntime::stop_peer(PeerId id) {
    PeerRec* rec = nullptr;
    {
        std::lock_guard lock(peers_mu_);
        rec = peers_.at(id).get();
    }
    std::mutex done_mu;
    std::condition_variable done_cv;
    bool done = false;
    post(*rec, [rec, &done_mu, &done_cv, &done] {
        rec->peer->lifecycle_stop();
        std::lock_guard lk(done_mu);
        done = true;
        done_cv.notify_one();
    });
    std::unique_lock lk(done_mu);
    done_cv.wait(lk, [&done] { return done; });
}

bool LiveRuntime::all_stopped() const {
    std::lock_guard lock(peers_mu_);
    for (const auto& [id, rec] : peers_) {
        if (rec->peer->state() == PeerState::Running) {
            return false;
        }
    }
    return true;
}

void LiveRuntime::stop_all() {
    if (stopping_.exchange(true)) {
        return;
    }
    // Stop peers high-id first so agents can flush their final logs through
    // the still-running infrastructure peers; the reactor keeps moving
    // messages during the stop waves.
    std::vector<PeerId> order;
    std::vector<PeerRec*> recs;
    {
        std::lock_guard lock(peers_mu_);
        for (auto it = peers_.rbegin(); it != peers_.rend(); ++it) {
            order.push_back(it->first);
            recs.push_back(it->second.get());
        }
    }
    for (const PeerId id : order) {
        stop_peer(id);
    }
    running_ = false;
    wake_reactor();
    if (reactor_.joinable()) {
        reactor_.join();
    }

    for (PeerRec* rec : recs) {
        {
            std::lock_guard lk(rec->executor->mu);
            rec->executor->stopping = true;
        }
        rec->executor->cv.notify_all();
        if (rec->executor->thread.joinable()) {
            rec->executor->thread.join();
        }
        if (rec->listen_fd >= 0) {
            ::close(rec->listen_fd);
            rec->listen_fd = -1;
        }
    }
    std::lock_guard net(net_mu_);
    for (auto& [fd, conn] : in_conns_) {
        ::close(fd);
    }
    in_conns_.clear();
    for (auto& [key, conn] : out_conns_) {
        if (conn.fd >= 0) {
            ::close(conn.fd);
        }
    }
    out_conns_.clear();
    if (wake_pipe_[0] >= 0) {
        ::close(wake_pipe_[0]);
        ::close(wake_pipe_[1]);
        wake_pipe_[0] = wake_pipe_[1] = -1;
    }
}

void LiveRuntime::executor_loop(PeerRec& rec) {
    Executor& ex = *rec.executor;
    while (true) {
        std::vector<std::function<void()>> tasks;
        std::vector<TimerId> due;
        {
            std::unique_lock lock(ex.mu);
            const auto next_deadline = [&]() -> std::optional<TimeMs> {
                std::optional<TimeMs> next;
                for (const auto& [id, t] : ex.timers) {
                    if (!t.cancelled && (!next || t.deadline < *next)) {
                        next = t.deadline;
                    }
                }
                return next;
            };
            while (ex.tasks.empty()) {
                if (ex.stopping) {
                    return;
                }
                const auto next = next_deadline();
                if (next && *next <= now_ms()) {
                    break;
                }
                if (next) {
                    ex.cv.wait_until(lock, t0_ + std::chrono::milliseconds(*next));
                } else {
                    ex.cv.wait(lock);
                }
            }
            tasks.assign(std::make_move_iterator(ex.tasks.begin()),
                         std::make_move_iterator(ex.tasks.end()));
            ex.tasks.clear();
            const TimeMs now = now_ms();
            for (auto it = ex.timers.begin(); it != ex.timers.end();) {
                if (it->second.cancelled) {
                    it = ex.timers.erase(it);
                    continue;
                }
                if (it->second.deadline <= now) {
                    due.push_back(it->first);
                    if (it->second.periodic) {
                        it->second.deadline += it->second.period_ms;
                        ++it;
                    } else {
                        it = ex.timers.erase(it);
                    }
                    continue;
                }
                ++it;
            }
        }
        for (auto& task : tasks) {
            task();
        }
        for (const TimerId id : due) {
            rec.peer->fire_timer(id);
        }
    }
}

TimerId LiveRuntime::schedule_timer(Peer& owner, TimeMs delay_ms, bool periodic,
                                    TimeMs period_ms) {
    PeerRec* rec = nullptr;
    {
        std::lock_guard lock(peers_mu_);
        rec = peers_.at(owner.id()).get();
    }
    const TimerId id = next_timer_id_++;
    {
        std::lock_guard lk(rec->executor->mu);
        rec->executor->timers[id] =
            Executor::TimerRec{now_ms() + delay_ms, period_ms, periodic, false};
    }
    rec->executor->cv.notify_one();
    return id;
}

void LiveRuntime::cancel_timer(Peer& owner, TimerId id) {
    PeerRec* rec = nullptr;
    {
        std::lock_guard lock(peers_mu_);
        const auto it = peers_.find(owner.id());
        if (it == peers_.end()) {
            return;
        }
        rec = it->second.get();
    }
    std::lock_guard lk(rec->executor->mu);
    const auto it = rec->executor->timers.find(id);
    if (it != rec->executor->timers.end()) {
        it->second.cancelled = true;
    }
}

int LiveRuntime::connect_with_retries(const std::string& host, std::uint16_t port) {
    for (int attempt = 0; attempt < cfg_.connect_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.connect_backoff_ms));
        }
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) {
            continue;
        }
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd);
            return -1;
        }
        set_nonblocking(fd);
        const int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
        if (rc == 0) {
            set_nodelay(fd);
            return fd;
        }
        if (errno == EINPROGRESS) {
            pollfd pfd{fd, POLLOUT, 0};
            if (::poll(&pfd, 1, 500) == 1 && (pfd.revents & POLLOUT) != 0) {
                int err = 0;
                socklen_t len = sizeof(err);
                ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
                if (err == 0) {
                    set_nodelay(fd);
                    return fd;
                }
            }
        }
        ::close(fd);
    }
    return -1;
}

SendReceipt LiveRuntime::send_from(Peer& sender, Envelope env) {
    SendReceipt receipt;
    receipt.seq = env.seq;
    if (env.recipient.is_sim()) {
        receipt.status = SendReceipt::Status::Failed;
        receipt.error = "SIM recipient in LIVE mode";
        return receipt;
    }
    const std::string key =
        std::to_string(sender.id()) + "|" + env.recipient.to_string();
    {
        std::unique_lock net(net_mu_);
        auto it = out_conns_.find(key);
        const auto now = std::chrono::steady_clock::now();
        if (it != out_conns_.end() && it->second.failed) {
            if (now < it->second.failed_until) {
                ++failed_sends_;
                receipt.status = SendReceipt::Status::Failed;
                receipt.error = "unreachable: " + env.recipient.to_string();
                return receipt;
            }
            out_conns_.erase(it);
            it = out_conns_.end();
        }
        if (it == out_conns_.end()) {
            // Lazily opened, long-lived connection for this directed pair.
            net.unlock();
            const int fd = connect_with_retries(env.recipient.host, env.recipient.port);
            net.lock();
            if (auto raced = out_conns_.find(key);
                raced != out_conns_.end() && raced->second.fd >= 0) {
                if (fd >= 0) {
                    ::close(fd); // lost a connect race; reuse the winner
                }
            } else {
                OutConn conn;
                if (fd < 0) {
                    conn.failed = true;
                    conn.failed_until = now + std::chrono::seconds(2);
                    out_conns_[key] = std::move(conn);
                    ++failed_sends_;
                    receipt.status = SendReceipt::Status::Failed;
                    receipt.error = "connect failed: " + env.recipient.to_string();
                    return receipt;
                }
                conn.fd = fd;
                out_conns_[key] = std::move(conn);
            }
        }
    }

    const bool queued = cfg_.drop_policy == DropPolicy::BlockSender
                            ? sender.outbound().push(std::move(env))
                            : sender.outbound().try_push(std::move(env));
    if (!queued) {
        receipt.status = SendReceipt::Status::Dropped;
        receipt.error = "outbound queue full";
        return receipt;
    }
    wake_reactor();
    return receipt;
}

void LiveRuntime::wake_reactor() {
    if (wake_pipe_[1] >= 0) {
        const char byte = 1;
        [[maybe_unused]] const auto n = ::write(wake_pipe_[1], &byte, 1);
    }
}

LiveRuntime::PeerRec* LiveRuntime::find_by_port(std::uint16_t port) {
    std::lock_guard lock(peers_mu_);
    for (auto& [id, rec] : peers_) {
        if (rec->port == port) {
            return rec.get();
        }
    }
    return nullptr;
}

void LiveRuntime::route_inbound(Envelope env) {
    if (env.recipient.is_sim()) {
        return;
    }
    PeerRec* rec = find_by_port(env.recipient.port);
    if (rec == nullptr) {
        return; // not hosted here
    }
    Peer* peer = rec->peer.get();
    if (!peer->push_inbound(env)) {
        if (cfg_.drop_policy == DropPolicy::BlockSender &&
            peer->state() == PeerState::Running) {
            std::lock_guard net(net_mu_);
            inbound_retry_.push_back(std::move(env)); // backpressure, retried
            return;
        }
        return; // dropped (counted by the queue) or peer not running
    }
    post(*rec, [peer] { peer->drain_inbound(); });
}

void LiveRuntime::reactor_loop() {
    std::string read_buf(64 * 1024, '\0');
    while (running_) {
        std::vector<pollfd> fds;
        std::vector<int> listener_ids;
        fds.push_back(pollfd{wake_pipe_[0], POLLIN, 0});
        {
            std::lock_guard lock(peers_mu_);
            for (auto& [id, rec] : peers_) {
                fds.push_back(pollfd{rec->listen_fd, POLLIN, 0});
            }
        }
        std::size_t in_start = fds.size();
        std::vector<int> in_fds;
        {
            std::lock_guard net(net_mu_);
            for (const auto& [fd, conn] : in_conns_) {
                fds.push_back(pollfd{fd, POLLIN, 0});
                in_fds.push_back(fd);
            }
            for (const auto& [key, conn] : out_conns_) {
                if (conn.fd >= 0 && !conn.write_buffer.empty()) {
                    fds.push_back(pollfd{conn.fd, POLLOUT, 0});
                }
            }
        }
        ::poll(fds.data(), fds.size(), 20);
        if (!running_) {
            break;
        }

        if ((fds[0].revents & POLLIN) != 0) {
            char drain[256];
            while (::read(wake_pipe_[0], drain, sizeof(drain)) > 0) {
            }
        }

        // New inbound connections.
        {
            std::lock_guard lock(peers_mu_);
            std::size_t slot = 1;
            for (auto& [id, rec] : peers_) {
                if (slot < in_start && (fds[slot].revents & POLLIN) != 0) {
                    while (true) {
                        const int cfd = ::accept(rec->listen_fd, nullptr, nullptr);
                        if (cfd < 0) {
                            break;
                        }
                        set_nonblocking(cfd);
                        set_nodelay(cfd);
                        std::lock_guard net(net_mu_);
                        in_conns_[cfd] = InConn{cfd, {}};
                    }
                }
                ++slot;
            }
        }

        // Readable inbound connections.
        std::vector<Envelope> arrived;
        {
            std::lock_guard net(net_mu_);
            for (const int fd : in_fds) {
                const auto it = in_conns_.find(fd);
                if (it == in_conns_.end()) {
                    continue;
                }
                while (true) {
                    const ssize_t n = ::read(fd, read_buf.data(), read_buf.size());
                    if (n > 0) {
                        it->second.decoder.feed(std::string_view(read_buf.data(),
                                                                 static_cast<std::size_t>(n)));
                        continue;
                    }
                    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
                        break;
                    }
                    ::close(fd);
                    in_conns_.erase(it);
                    break;
                }
                const auto still = in_conns_.find(fd);
                if (still == in_conns_.end()) {
                    continue;
                }
                try {
                    while (auto env = still->second.decoder.next()) {
                        arrived.push_back(std::move(*env));
                    }
                } catch (const FrameError&) {
                    ::close(fd);
                    in_conns_.erase(still);
                }
            }
        }
        for (auto& env : arrived) {
            route_inbound(std::move(env));
        }

        // Drain outbound queues into connection buffers.
        {
            std::vector<std::pair<Peer*, PeerId>> peer_list;
            {
                std::lock_guard lock(peers_mu_);
                for (auto& [id, rec] : peers_) {
                    peer_list.emplace_back(rec->peer.get(), id);
                }
            }
            std::lock_guard net(net_mu_);
            for (auto& [peer, id] : peer_list) {
                while (auto env = peer->outbound().pop()) {
                    const std::string key =
                        std::to_string(id) + "|" + env->recipient.to_string();
                    const auto it = out_conns_.find(key);
                    if (it == out_conns_.end() || it->second.fd < 0) {
                        ++failed_sends_;
                        continue;
                    }
                    it->second.write_buffer += encode_frame(*env);
                }
            }

            // Flush writable buffers.
            for (auto it = out_conns_.begin(); it != out_conns_.end(); ++it) {
                OutConn& conn = it->second;
                if (conn.fd < 0 || conn.write_buffer.empty()) {
                    continue;
                }
                const ssize_t n =
                    ::send(conn.fd, conn.write_buffer.data(), conn.write_buffer.size(),
                           MSG_NOSIGNAL | MSG_DONTWAIT);
                if (n > 0) {
                    conn.write_buffer.erase(0, static_cast<std::size_t>(n));
                } else if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) {
                    ::close(conn.fd);
                    conn.fd = -1;
                    conn.failed = true;
                    conn.failed_until =
                        std::chrono::steady_clock::now() + std::chrono::seconds(2);
                    ++failed_sends_;
                }
            }
        }

        // Retry ring for BLOCK_SENDER inbound backpressure.
        std::deque<Envelope> retry;
        {
            std::lock_guard net(net_mu_);
            retry.swap(inbound_retry_);
        }
        for (auto& env : retry) {
            route_inbound(std::move(env));
        }
    }
}

} // namespace meshbed
