#pragma once

// Discrete-event core. One logical clock, one event queue ordered by
// (time, seq). The source creates a chunk every c/s seconds; every node runs
// a probe/serve round machine over its processor-shared upload link.
//
// Transfer model: a message of size x sent from i to j finishes its
// transmission when its share of u_i has carried x Mb, and arrives
// RTT_ij / 2 later. Download bandwidth is unlimited.

#include <chunksim/chunk_set.hpp>
#include <chunksim/errors.hpp>
#include <chunksim/metrics.hpp>
#include <chunksim/model.hpp>
#include <chunksim/overlay.hpp>
#include <chunksim/rng.hpp>
#include <chunksim/schemes.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <vector>

namespace chunksim {

enum class EventKind : std::uint8_t {
	ChunkCreated,
	RoundStart,
	RateRecompute,
	ProbeArrived,
	ReplyArrived,
	TransferCompleted,
	ReplyTimeout,
};

struct Event
{
	double time;
	std::uint64_t seq;
	EventKind kind;
	PeerId peer;
	std::uint64_t tag; // chunk, link epoch, message id or round id
};

struct EventLater
{
	bool operator()(Event const& a, Event const& b) const
	{
		if (a.time != b.time) return a.time > b.time;
		return a.seq > b.seq;
	}
};

class EventQueue
{
public:
	void push(double time, EventKind kind, PeerId peer, std::uint64_t tag)
	{
		m_queue.push({time, m_seq++, kind, peer, tag});
	}
	bool empty() const { return m_queue.empty(); }
	Event const& top() const { return m_queue.top(); }
	Event pop()
	{
		Event e = m_queue.top();
		m_queue.pop();
		return e;
	}
	std::size_t size() const { return m_queue.size(); }

private:
	std::priority_queue<Event, std::vector<Event>, EventLater> m_queue;
	std::uint64_t m_seq = 0;
};

using MessageId = std::uint32_t;

struct Transmission
{
	MessageId msg;
	double remaining; // Mb
};

// Processor-shared upload link: k active transmissions each progress at
// capacity / k.
class UploadLink
{
public:
	UploadLink() = default;
	explicit UploadLink(double capacity) : m_capacity(capacity) {}

	double capacity() const { return m_capacity; }
	std::vector<Transmission> const& active() const { return m_active; }
	bool busy() const { return !m_active.empty(); }
	double rate_each() const
	{
		return m_active.empty() ? 0.0 : m_capacity / static_cast<double>(m_active.size());
	}
	std::uint64_t epoch() const { return m_epoch; }

	void advance(double now)
	{
		double const dt = now - m_last;
		if (dt > 0.0 && !m_active.empty()) {
			double const done = rate_each() * dt;
			for (auto& t : m_active) t.remaining -= done;
		}
		m_last = now;
	}

	void add(double now, MessageId msg, double size)
	{
		advance(now);
		m_active.push_back({msg, size});
	}

	// Time at which the next transmission finishes if nothing else changes.
	// Bumps the epoch so that previously scheduled completions go stale.
	std::optional<double> reschedule(double now)
	{
		++m_epoch;
		if (m_active.empty()) return std::nullopt;
		double least = m_active.front().remaining;
		for (auto const& t : m_active) least = std::min(least, t.remaining);
		return now + std::max(0.0, least) / rate_each();
	}

	// Removes the transmission(s) that just finished: the one with the least
	// remaining size plus anything tied with it.
	std::vector<MessageId> complete(double now)
	{
		advance(now);
		std::vector<MessageId> done;
		if (m_active.empty()) return done;
		double least = m_active.front().remaining;
		for (auto const& t : m_active) least = std::min(least, t.remaining);
		double const cutoff = least + 1e-12;
		auto keep = m_active.begin();
		for (auto& t : m_active) {
			if (t.remaining <= cutoff) done.push_back(t.msg);
			else *keep++ = t;
		}
		m_active.erase(keep, m_active.end());
		return done;
	}

private:
	double m_capacity = 1.0;
	std::vector<Transmission> m_active;
	double m_last = 0.0;
	std::uint64_t m_epoch = 0;
};

// Completion time of transmission `which` on `link` at time `now`, assuming
// no transmission is added or removed meanwhile; the message arrives rtt/2
// after that.
inline double transfer_arrival_time(UploadLink const& link, MessageId which, double now,
	double rtt)
{
	std::vector<double> rem;
	double target = -1.0;
	for (auto const& t : link.active()) {
		rem.push_back(std::max(0.0, t.remaining));
		if (t.msg == which) target = rem.back();
	}
	if (target < 0.0) return now + rtt / 2.0;
	std::sort(rem.begin(), rem.end());
	double t = now;
	double drained = 0.0;
	std::size_t k = rem.size();
	for (std::size_t i = 0; i < rem.size(); ++i) {
		double const step = std::min(rem[i], target) - drained;
		t += step * static_cast<double>(k) / link.capacity();
		drained += step;
		if (drained >= target) break;
		--k;
	}
	return t + rtt / 2.0;
}

// Single transmission at a fixed rate.
inline double transfer_arrival_time(double size, double rate, double rtt)
{
	return size / rate + rtt / 2.0;
}

enum class MessageKind : std::uint8_t { probe, reply, data };

inline char const* to_string(MessageKind k)
{
	switch (k) {
		case MessageKind::probe: return "probe";
		case MessageKind::reply: return "reply";
		case MessageKind::data: return "data";
	}
	return "?";
}

struct Message
{
	MessageKind kind = MessageKind::data;
	PeerId src = -1;
	PeerId dst = -1;
	ChunkIndex chunk = no_chunk;
	double size = 0.0;
	std::uint64_t round = 0;
	BufferMap map; // reply payload
};

enum class Phase : std::uint8_t { idle, probing, serving };

struct PeerState
{
	PeerId id = -1;
	double upload = 0.0;
	std::vector<PeerId> targets;      // neighbours that may receive chunks
	std::vector<double> target_bw;    // their upload bandwidth
	ChunkBuffer buffer;
	ChunkSet incoming;                // chunks currently being sent to this peer
	UploadLink link;
	Rng rng;
	Phase phase = Phase::idle;

	std::uint64_t round = 0;
	bool round_open = false;
	double round_start = 0.0;
	int awaiting = 0;
	std::vector<Reply> replies;
	std::vector<Reply> pending;       // continuous mode: last complete reply set
	int active_data = 0;
	bool parked = false;
	std::uint64_t round_gen = 0;      // invalidates superseded RoundStart events

	// recent (recipient, chunk) sends, used to complete stale buffer maps
	static constexpr std::size_t recent_capacity = 64;
	std::array<Assignment, recent_capacity> recent{};
	std::size_t recent_count = 0;

	void remember(Assignment a)
	{
		recent[recent_count % recent_capacity] = a;
		++recent_count;
	}
};

// Records one data arrival at `acc` for a peer and updates its buffer. Late
// and duplicate deliveries are counted but not recorded as receptions.
inline DeliveryResult deliver_chunk(ChunkBuffer& buffer, PeerAccumulator& acc,
	Accumulators const& window, ChunkIndex chunk, double arrival, double creation)
{
	DeliveryResult r = buffer.deliver(chunk);
	switch (r.kind) {
		case Delivery::fresh:
			if (window.measured(chunk)) {
				acc.delays.push_back(arrival - creation);
				acc.in_time.insert(chunk);
			}
			break;
		case Delivery::duplicate:
			++acc.duplicates;
			break;
		case Delivery::late:
			++acc.late;
			break;
	}
	if (r.kind != Delivery::fresh && window.in_window(arrival))
		acc.duplicate_received += window.chunk_size;
	return r;
}

// Tab-separated event trace: time, kind, src, dst, chunk, size.
class TraceWriter
{
public:
	explicit TraceWriter(std::ostream* out) : m_out(out) {}
	bool enabled() const { return m_out != nullptr; }

	void write(double time, char const* kind, long long src, long long dst, long long chunk,
		double size)
	{
		if (!m_out) return;
		char buf[160];
		int len = std::snprintf(buf, sizeof(buf), "%.17g\t%s\t%lld\t%lld\t%lld\t%.17g\n", time,
			kind, src, dst, chunk, size);
		m_out->write(buf, len);
	}

private:
	std::ostream* m_out;
};

struct RunResult
{
	MetricsReport report;
	Accumulators accumulators;
	double median_rtt = 0.0;
	double end_time = 0.0;
	std::uint64_t events = 0;
};

class Simulator
{
public:
	Simulator(SimConfig const& config, Overlay overlay, std::ostream* trace = nullptr)
		: m_cfg(validate(config))
		, m_overlay(std::move(overlay))
		, m_trace(trace)
		, m_acc(Accumulators::for_config(m_cfg))
	{
		if (m_overlay.peers() != m_cfg.n)
			throw ConfigUnsatisfiable("overlay size does not match n");
		setup_nodes();
	}

	RunResult run()
	{
		double const end_time = m_cfg.horizon(m_cfg.end_measured() - 1);
		std::int64_t const needed = m_acc.eligible();

		m_queue.push(0.0, EventKind::ChunkCreated, source(), 0);
		for (auto& p : m_nodes) schedule_round(p, 0.0);

		std::uint64_t events = 0;
		while (!m_queue.empty()) {
			if (m_queue.top().time > end_time) break;
			Event ev = m_queue.pop();
			m_now = ev.time;
			++events;
			dispatch(ev);
			if (m_resolved == needed && m_now >= m_acc.t1) break;
		}

		RunResult r;
		r.accumulators = m_acc;
		r.report = finalize(m_acc);
		r.median_rtt = median_rtt(m_overlay);
		r.end_time = m_now;
		r.events = events;
		return r;
	}

	Overlay const& overlay() const { return m_overlay; }

private:
	PeerId source() const { return m_overlay.source(); }
	PeerState& node(PeerId id) { return m_nodes[static_cast<std::size_t>(id)]; }
	PeerAccumulator& acc(PeerId id) { return m_acc.nodes[static_cast<std::size_t>(id)]; }

	void setup_nodes()
	{
		int const v = m_overlay.vertices();
		m_nodes.resize(static_cast<std::size_t>(v));

		Rng bw_rng(m_cfg.seed, "upload");
		auto const& classes = m_cfg.upload_dist.classes;
		for (PeerId i = 0; i < v; ++i) {
			auto& p = node(i);
			p.id = i;
			p.buffer = ChunkBuffer(m_cfg.buffer_capacity);
			p.rng = Rng(m_cfg.seed, "peer", static_cast<std::uint64_t>(i));
			if (i == source()) p.upload = m_cfg.source_upload;
			else if (classes.size() == 1) p.upload = classes.front().rate;
			else {
				double x = bw_rng.uniform();
				p.upload = classes.back().rate;
				for (auto const& c : classes) {
					if (x < c.probability) {
						p.upload = c.rate;
						break;
					}
					x -= c.probability;
				}
			}
			p.link = UploadLink(p.upload);
		}
		for (PeerId i = 0; i < v; ++i) {
			auto& p = node(i);
			for (auto const& l : m_overlay.links(i)) {
				if (l.peer == source()) continue;
				p.targets.push_back(l.peer);
				p.target_bw.push_back(node(l.peer).upload);
			}
		}
		if (node(source()).targets.empty())
			throw ConfigUnsatisfiable("the source has no neighbour to push to");

		if (m_trace.enabled()) {
			for (PeerId i = 0; i < v; ++i) m_trace.write(0.0, "peer", i, -1, -1, node(i).upload);
			for (auto const& e : m_overlay.edges()) m_trace.write(0.0, "link", e.a, e.b, -1, e.rtt);
		}
	}

	void dispatch(Event const& ev)
	{
		switch (ev.kind) {
			case EventKind::ChunkCreated: on_chunk_created(static_cast<ChunkIndex>(ev.tag)); break;
			case EventKind::RoundStart:
				if (ev.tag == node(ev.peer).round_gen) start_round(node(ev.peer));
				break;
			case EventKind::RateRecompute: on_link_event(node(ev.peer), ev.tag); break;
			case EventKind::ProbeArrived: on_probe(static_cast<MessageId>(ev.tag)); break;
			case EventKind::ReplyArrived: on_reply(static_cast<MessageId>(ev.tag)); break;
			case EventKind::TransferCompleted: on_data(static_cast<MessageId>(ev.tag)); break;
			case EventKind::ReplyTimeout: on_timeout(node(ev.peer), ev.tag); break;
		}
	}

	// -- chunks and buffers ---------------------------------------------------

	void expire(PeerState& p)
	{
		p.buffer.expire_below(m_newest - m_cfg.buffer_capacity + 1);
	}

	void on_chunk_created(ChunkIndex index)
	{
		m_newest = index;
		auto& s = node(source());
		expire(s);
		s.buffer.deliver(index);
		m_trace.write(m_now, "create", source(), -1, index, m_cfg.chunk_size);

		double const next = m_cfg.creation_time(index + 1);
		if (next <= m_cfg.horizon(m_cfg.end_measured() - 1))
			m_queue.push(next, EventKind::ChunkCreated, source(), static_cast<std::uint64_t>(index + 1));
		buffer_changed(s);
	}

	void buffer_changed(PeerState& p)
	{
		if (p.parked) {
			p.parked = false;
			++p.round_gen;
			start_round(p);
			return;
		}
		if (m_cfg.round_mode != RoundMode::sequential) {
			if (uses_buffer_maps(m_cfg.scheme)) try_serve(p);
			else serve_blind(p);
		}
	}

	// The source pushes one chunk at a time: with u_s close to s, parallel
	// copies of the newest chunk would delay the injection of the next ones.
	int slots(PeerState const& p) const
	{
		return p.id == source() ? 1 : m_cfg.max_parallel_uploads;
	}

	void park(PeerState& p)
	{
		p.parked = true;
		p.phase = Phase::idle;
	}

	// -- messages ---------------------------------------------------------------

	MessageId new_message(MessageKind kind, PeerId src, PeerId dst, ChunkIndex chunk, double size,
		std::uint64_t round)
	{
		MessageId id;
		if (!m_free.empty()) {
			id = m_free.back();
			m_free.pop_back();
		}
		else {
			id = static_cast<MessageId>(m_messages.size());
			m_messages.emplace_back();
		}
		auto& m = m_messages[id];
		m.kind = kind;
		m.src = src;
		m.dst = dst;
		m.chunk = chunk;
		m.size = size;
		m.round = round;
		m.map = BufferMap{};
		return id;
	}

	void release(MessageId id)
	{
		m_messages[id].map = BufferMap{};
		m_free.push_back(id);
	}

	static char const* send_kind(MessageKind k)
	{
		switch (k) {
			case MessageKind::probe: return "send_probe";
			case MessageKind::reply: return "send_reply";
			case MessageKind::data: return "send_data";
		}
		return "?";
	}
	static char const* done_kind(MessageKind k)
	{
		switch (k) {
			case MessageKind::probe: return "done_probe";
			case MessageKind::reply: return "done_reply";
			case MessageKind::data: return "done_data";
		}
		return "?";
	}
	static char const* recv_kind(MessageKind k)
	{
		switch (k) {
			case MessageKind::probe: return "recv_probe";
			case MessageKind::reply: return "recv_reply";
			case MessageKind::data: return "recv_data";
		}
		return "?";
	}

	void transmit(PeerState& p, MessageId id)
	{
		auto const& m = m_messages[id];
		m_trace.write(m_now, send_kind(m.kind), m.src, m.dst, m.chunk, m.size);
		p.link.add(m_now, id, m.size);
		schedule_link(p);
	}

	void schedule_link(PeerState& p)
	{
		if (auto t = p.link.reschedule(m_now))
			m_queue.push(*t, EventKind::RateRecompute, p.id, p.link.epoch());
	}

	void on_link_event(PeerState& p, std::uint64_t epoch)
	{
		if (epoch != p.link.epoch()) return;
		auto done = p.link.complete(m_now);
		schedule_link(p);
		for (MessageId id : done) transmission_done(p, id);
	}

	void transmission_done(PeerState& p, MessageId id)
	{
		auto const& m = m_messages[id];
		m_trace.write(m_now, done_kind(m.kind), m.src, m.dst, m.chunk, m.size);
		if (m_acc.in_window(m_now)) {
			if (m.kind == MessageKind::data) acc(p.id).data_sent += m.size;
			else acc(p.id).control_sent += m.size;
		}
		double const arrival = m_now + m_overlay.rtt(m.src, m.dst) / 2.0;
		EventKind kind = m.kind == MessageKind::probe ? EventKind::ProbeArrived
			: m.kind == MessageKind::reply ? EventKind::ReplyArrived
			: EventKind::TransferCompleted;
		m_queue.push(arrival, kind, m.dst, id);

		if (m.kind == MessageKind::data) {
			--p.active_data;
			data_slot_freed(p);
		}
	}

	// -- round machine ----------------------------------------------------------

	void start_round(PeerState& p)
	{
		if (p.targets.empty()) {
			p.phase = Phase::idle;
			return;
		}
		expire(p);
		if (p.buffer.empty()) {
			park(p);
			return;
		}
		if (!uses_buffer_maps(m_cfg.scheme)) {
			if (m_cfg.round_mode != RoundMode::sequential) serve_blind(p);
			else blind_round(p);
			return;
		}

		++p.round;
		p.round_open = true;
		p.round_start = m_now;
		p.replies.clear();
		p.phase = p.active_data > 0 ? Phase::serving : Phase::probing;

		std::size_t const k = std::min(p.targets.size(), static_cast<std::size_t>(m_cfg.probe_set_size));
		auto probed = select_peers(m_cfg.scheme, p.targets, p.target_bw, k, p.rng);
		p.awaiting = static_cast<int>(probed.size());
		double max_rtt = 0.0;
		for (PeerId q : probed) {
			max_rtt = std::max(max_rtt, m_overlay.rtt(p.id, q));
			transmit(p, new_message(MessageKind::probe, p.id, q, no_chunk, m_cfg.control_msg_size, p.round));
		}
		if (max_rtt > 0.0)
			m_queue.push(m_now + 4.0 * max_rtt, EventKind::ReplyTimeout, p.id, p.round);
	}

	void on_probe(MessageId id)
	{
		auto const& m = m_messages[id];
		m_trace.write(m_now, "recv_probe", m.src, m.dst, -1, m.size);
		auto& q = node(m.dst);
		expire(q);
		MessageId reply = new_message(MessageKind::reply, q.id, m.src, no_chunk, m_cfg.control_msg_size,
			m.round);
		m_messages[reply].map = q.buffer.snapshot(q.id, m_now);
		m_messages[reply].map.window.merge(q.incoming);
		release(id);
		transmit(q, reply);
	}

	void on_reply(MessageId id)
	{
		auto& m = m_messages[id];
		m_trace.write(m_now, "recv_reply", m.src, m.dst, -1, m.size);
		auto& p = node(m.dst);
		if (p.round_open && m.round == p.round) {
			p.replies.push_back({m.src, std::move(m.map)});
			if (--p.awaiting == 0) complete_round(p);
		}
		release(id);
	}

	void on_timeout(PeerState& p, std::uint64_t round)
	{
		if (p.round_open && round == p.round) complete_round(p);
	}

	// Buffer maps as seen by this sender: the snapshot plus whatever this
	// sender has already pushed to the same peer.
	std::vector<Reply> completed_maps(PeerState const& p, std::vector<Reply> const& replies) const
	{
		std::vector<Reply> out = replies;
		std::size_t const n = std::min(p.recent_count, PeerState::recent_capacity);
		for (auto& r : out)
			for (std::size_t i = 0; i < n; ++i)
				if (p.recent[i].recipient == r.from) r.map.window.insert(p.recent[i].chunk);
		return out;
	}

	void send_assignment(PeerState& p, RecipientAssignment const& assignment)
	{
		for (auto const& a : assignment) {
			++p.active_data;
			p.remember(a);
			node(a.recipient).incoming.insert(a.chunk);
			transmit(p, new_message(MessageKind::data, p.id, a.recipient, a.chunk, m_cfg.chunk_size, 0));
		}
		if (!assignment.empty()) p.phase = Phase::serving;
	}

	void complete_round(PeerState& p)
	{
		p.round_open = false;
		expire(p);
		bool const instant = m_now == p.round_start;

		if (m_cfg.round_mode == RoundMode::sequential) {
			auto assignment = assign_recipients(m_cfg.scheme, p.buffer.held(), completed_maps(p, p.replies),
				static_cast<std::size_t>(slots(p)), p.rng);
			p.replies.clear();
			if (!assignment.empty()) send_assignment(p, assignment);
			else if (instant) park(p);
			else schedule_round(p, m_now);
			return;
		}

		p.pending = std::move(p.replies);
		p.replies.clear();
		try_serve(p);
		if (instant) park(p);
		else if (m_cfg.round_mode == RoundMode::pipelined && p.active_data >= slots(p) && has_useful(p))
			return; // resumed by data_slot_freed
		else schedule_round(p, m_now);
	}

	bool has_useful(PeerState const& p) const
	{
		auto const maps = completed_maps(p, p.pending);
		return std::any_of(maps.begin(), maps.end(), [&](Reply const& r) {
			return latest_useful_chunk(p.buffer.held(), r.map) != no_chunk;
		});
	}

	void schedule_round(PeerState& p, double when)
	{
		m_queue.push(when, EventKind::RoundStart, p.id, ++p.round_gen);
	}

	// continuous mode: fill free upload slots from the pending replies
	void try_serve(PeerState& p)
	{
		int const free = slots(p) - p.active_data;
		if (free <= 0 || p.pending.empty()) return;
		expire(p);
		auto assignment = assign_recipients(m_cfg.scheme, p.buffer.held(), completed_maps(p, p.pending),
			static_cast<std::size_t>(free), p.rng);
		if (assignment.empty()) return;
		std::erase_if(p.pending, [&](Reply const& r) {
			return std::any_of(assignment.begin(), assignment.end(),
				[&](Assignment const& a) { return a.recipient == r.from; });
		});
		send_assignment(p, assignment);
	}

	std::vector<Reply> blind_targets(PeerState& p, std::size_t k)
	{
		k = std::min(k, p.targets.size());
		auto chosen = select_peers(m_cfg.scheme, p.targets, p.target_bw, k, p.rng);
		std::vector<Reply> out;
		out.reserve(chosen.size());
		for (PeerId q : chosen) out.push_back({q, BufferMap{}});
		return out;
	}

	// sequential latest-blind round: no probing, push the newest chunk
	void blind_round(PeerState& p)
	{
		auto targets = blind_targets(p, static_cast<std::size_t>(m_cfg.probe_set_size));
		auto assignment = assign_recipients(m_cfg.scheme, p.buffer.held(), targets,
			static_cast<std::size_t>(slots(p)), p.rng);
		if (assignment.empty()) park(p);
		else send_assignment(p, assignment);
	}

	// continuous latest-blind: keep every upload slot busy with the newest chunk
	void serve_blind(PeerState& p)
	{
		int const free = slots(p) - p.active_data;
		if (free <= 0 || p.targets.empty()) return;
		expire(p);
		if (p.buffer.empty()) {
			park(p);
			return;
		}
		auto targets = blind_targets(p, static_cast<std::size_t>(m_cfg.probe_set_size));
		auto assignment = assign_recipients(m_cfg.scheme, p.buffer.held(), targets,
			static_cast<std::size_t>(free), p.rng);
		send_assignment(p, assignment);
	}

	void data_slot_freed(PeerState& p)
	{
		if (m_cfg.round_mode == RoundMode::sequential) {
			if (p.active_data == 0) schedule_round(p, m_now);
			return;
		}
		if (!uses_buffer_maps(m_cfg.scheme)) {
			serve_blind(p);
			return;
		}
		if (p.parked) {
			// the pending replies predate the park; probe afresh
			p.parked = false;
			p.pending.clear();
			++p.round_gen;
			start_round(p);
			return;
		}
		try_serve(p);
		if (m_cfg.round_mode == RoundMode::pipelined && !p.round_open) {
			// probing was paused on a reply set that has now been used
			++p.round_gen;
			start_round(p);
		}
	}

	void on_data(MessageId id)
	{
		auto const m = m_messages[id];
		release(id);
		auto& r = node(m.dst);
		r.incoming.erase(m.chunk);
		expire(r);
		auto result = deliver_chunk(r.buffer, acc(r.id), m_acc, m.chunk, m_now,
			m_cfg.creation_time(m.chunk));
		m_trace.write(m_now, "recv_data", m.src, m.dst, m.chunk, m.size);
		if (result.evicted != no_chunk)
			m_trace.write(m_now, "evict", r.id, -1, result.evicted, m_cfg.chunk_size);
		if (result.kind != Delivery::fresh) return;
		if (m_acc.measured(m.chunk)) ++m_resolved;
		buffer_changed(r);
	}

	SimConfig m_cfg;
	Overlay m_overlay;
	TraceWriter m_trace;
	Accumulators m_acc;
	std::vector<PeerState> m_nodes;
	std::vector<Message> m_messages;
	std::vector<MessageId> m_free;
	EventQueue m_queue;
	double m_now = 0.0;
	ChunkIndex m_newest = -1;
	std::int64_t m_resolved = 0;
};

// Builds the overlay from the config's seed and runs one simulation.
inline RunResult run(SimConfig const& config, std::ostream* trace = nullptr)
{
	SimConfig const cfg = validate(config);
	return Simulator(cfg, build_overlay(cfg), trace).run();
}

} // namespace chunksim
