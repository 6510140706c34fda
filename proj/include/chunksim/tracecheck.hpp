#pragma once

// Replays an engine trace and checks it against the transfer and buffer
// model without looking at engine state: only the trace lines and the run's
// config (and optionally its report) are used.

#include <chunksim/errors.hpp>
#include <chunksim/model.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace chunksim {

enum class Rule { causality, conservation, sharing, buffer, send_before_own };

inline std::string_view to_string(Rule r)
{
	switch (r) {
		case Rule::causality: return "causality";
		case Rule::conservation: return "conservation";
		case Rule::sharing: return "sharing";
		case Rule::buffer: return "buffer";
		case Rule::send_before_own: return "send-before-own";
	}
	return "?";
}

struct TraceViolation
{
	double time;
	Rule rule;
	std::string description;
};

struct TraceLine
{
	double time = 0.0;
	std::string kind;
	long long src = -1;
	long long dst = -1;
	long long chunk = -1;
	double size = 0.0;
};

inline TraceLine parse_trace_line(std::string_view line, std::size_t line_no)
{
	std::vector<std::string_view> f;
	std::size_t start = 0;
	while (true) {
		auto tab = line.find('\t', start);
		f.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
		if (tab == std::string_view::npos) break;
		start = tab + 1;
	}
	if (f.size() != 6) throw MalformedTrace(line_no, "expected 6 tab-separated fields");

	auto number = [&](std::string_view s, auto& out) {
		auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
		if (ec != std::errc{} || p != s.data() + s.size())
			throw MalformedTrace(line_no, "bad number '" + std::string(s) + "'");
	};
	TraceLine t;
	number(f[0], t.time);
	t.kind = std::string(f[1]);
	number(f[2], t.src);
	number(f[3], t.dst);
	number(f[4], t.chunk);
	number(f[5], t.size);
	if (!std::isfinite(t.time) || t.time < 0.0) throw MalformedTrace(line_no, "bad time");
	return t;
}

struct TraceCheckOptions
{
	double time_tolerance = 1e-9;       // seconds
	double relative_tolerance = 1e-9;   // byte and rate reconciliation
	std::size_t max_violations = 1000;  // stored; the total is always counted
};

struct TraceCheckResult
{
	std::vector<TraceViolation> violations;
	std::size_t total = 0;
	std::size_t lines = 0;
	// reconstructed from the trace alone
	std::int64_t in_time_deliveries = 0;
	double control_bytes = 0.0;   // completed in the window
	double data_bytes = 0.0;
	double duplicate_bytes = 0.0; // non-fresh data arriving in the window

	bool ok() const { return total == 0; }
};

class TraceChecker
{
public:
	TraceChecker(SimConfig const& config, TraceCheckOptions opt = {})
		: m_cfg(config)
		, m_opt(opt)
		, m_t0(config.creation_time(config.first_measured()))
		, m_t1(config.creation_time(config.end_measured()))
	{}

	void feed(TraceLine const& l, std::size_t line_no)
	{
		++m_result.lines;
		if (l.time < m_now) throw MalformedTrace(line_no, "time goes backwards");
		m_now = l.time;
		check_pending_eviction(l);

		if (l.kind == "peer") on_peer(l, line_no);
		else if (l.kind == "link") on_link(l, line_no);
		else if (l.kind == "create") on_create(l);
		else if (l.kind.starts_with("send_")) on_send(l, kind_of(l.kind.substr(5), line_no));
		else if (l.kind.starts_with("done_")) on_done(l, kind_of(l.kind.substr(5), line_no));
		else if (l.kind.starts_with("recv_")) on_recv(l, kind_of(l.kind.substr(5), line_no));
		else if (l.kind == "evict") on_evict(l);
		else throw MalformedTrace(line_no, "unknown event kind '" + l.kind + "'");
	}

	// Finishes the replay; with a report, also reconciles counts and rates.
	TraceCheckResult finish(MetricsReport const* report = nullptr)
	{
		if (m_evict_due) violation(Rule::buffer, "overflowing delivery without eviction at end of trace");
		if (report) reconcile(*report);
		return m_result;
	}

private:
	enum Kind { probe, reply, data };

	struct Active
	{
		Kind kind;
		long long dst;
		long long chunk;
		double size;
		double remaining;
	};

	struct Node
	{
		double upload = 0.0;
		std::vector<Active> active;
		double last = 0.0;
		std::set<long long> held;
		std::set<long long> ever;
	};

	static Kind kind_of(std::string_view s, std::size_t line_no)
	{
		if (s == "probe") return probe;
		if (s == "reply") return reply;
		if (s == "data") return data;
		throw MalformedTrace(line_no, "unknown message kind '" + std::string(s) + "'");
	}

	void violation(Rule rule, std::string text)
	{
		++m_result.total;
		if (m_result.violations.size() < m_opt.max_violations)
			m_result.violations.push_back({m_now, rule, std::move(text)});
	}

	Node* node(long long id)
	{
		if (id < 0 || id >= static_cast<long long>(m_nodes.size())) return nullptr;
		return &m_nodes[static_cast<std::size_t>(id)];
	}

	long long source() const { return m_cfg.n; }
	long long lower_bound() const { return m_newest - m_cfg.buffer_capacity + 1; }

	std::optional<double> rtt(long long a, long long b) const
	{
		auto it = m_rtt.find({std::min(a, b), std::max(a, b)});
		if (it == m_rtt.end()) return std::nullopt;
		return it->second;
	}

	void on_peer(TraceLine const& l, std::size_t line_no)
	{
		if (l.src != static_cast<long long>(m_nodes.size()))
			throw MalformedTrace(line_no, "peer lines must list ids in order");
		m_nodes.push_back(Node{l.size, {}, 0.0, {}, {}});
	}

	void on_link(TraceLine const& l, std::size_t line_no)
	{
		if (!node(l.src) || !node(l.dst)) throw MalformedTrace(line_no, "link to an unknown node");
		if (m_nodes.size() != static_cast<std::size_t>(m_cfg.n) + 1)
			throw MalformedTrace(line_no, "node count does not match the config");
		m_rtt[{std::min(l.src, l.dst), std::max(l.src, l.dst)}] = l.size;
	}

	void expire(Node& v)
	{
		long long const lo = lower_bound();
		v.held.erase(v.held.begin(), v.held.lower_bound(lo));
	}

	void on_create(TraceLine const& l)
	{
		if (l.chunk != m_newest + 1) violation(Rule::causality, "chunk " + std::to_string(l.chunk) + " created out of order");
		double const expected = m_cfg.creation_time(l.chunk);
		if (std::abs(expected - l.time) > m_opt.time_tolerance)
			violation(Rule::causality, "chunk " + std::to_string(l.chunk) + " created at the wrong time");
		m_newest = l.chunk;
		Node* s = node(source());
		if (!s) return;
		expire(*s);
		s->held.insert(l.chunk);
		s->ever.insert(l.chunk);
	}

	// Progress every active transmission of v up to now at upload / k each.
	void advance(Node& v, long long id)
	{
		double const dt = m_now - v.last;
		if (dt > 0.0 && !v.active.empty()) {
			double const each = v.upload / static_cast<double>(v.active.size()) * dt;
			for (auto& a : v.active) a.remaining -= each;
		}
		v.last = m_now;
		double const rate = v.active.empty() ? v.upload : v.upload / static_cast<double>(v.active.size());
		for (auto const& a : v.active)
			if (a.remaining < -tolerance_mb(rate, a.size))
				violation(Rule::sharing, "transmission from " + std::to_string(id) + " to "
					+ std::to_string(a.dst) + " should have finished "
					+ std::to_string(-a.remaining / rate) + " s earlier");
	}

	double tolerance_mb(double rate, double size) const
	{
		return m_opt.time_tolerance * rate + m_opt.relative_tolerance * size;
	}

	void on_send(TraceLine const& l, Kind kind)
	{
		Node* v = node(l.src);
		if (!v || !node(l.dst)) {
			violation(Rule::causality, "send between unknown nodes");
			return;
		}
		if (!rtt(l.src, l.dst)) violation(Rule::causality, "send over a missing link");
		double const expected_size = kind == data ? m_cfg.chunk_size : m_cfg.control_msg_size;
		if (std::abs(l.size - expected_size) > m_opt.relative_tolerance * std::max(expected_size, 1e-12))
			violation(Rule::conservation, "message size differs from the configured size");
		if (kind == data) {
			expire(*v);
			if (!v->held.contains(l.chunk))
				violation(Rule::send_before_own, "node " + std::to_string(l.src) + " sends chunk "
					+ std::to_string(l.chunk) + " it does not hold");
		}
		advance(*v, l.src);
		v->active.push_back({kind, l.dst, l.chunk, l.size, l.size});
	}

	void on_done(TraceLine const& l, Kind kind)
	{
		Node* v = node(l.src);
		if (!v) {
			violation(Rule::causality, "completion at an unknown node");
			return;
		}
		advance(*v, l.src);
		auto it = std::find_if(v->active.begin(), v->active.end(), [&](Active const& a) {
			return a.kind == kind && a.dst == l.dst && a.chunk == l.chunk;
		});
		if (it == v->active.end()) {
			violation(Rule::causality, "completion of a transmission that was never started");
			return;
		}
		double const rate = v->upload / static_cast<double>(v->active.size());
		if (std::abs(it->remaining) > tolerance_mb(rate, it->size))
			violation(Rule::sharing, "transmission from " + std::to_string(l.src) + " to "
				+ std::to_string(l.dst) + " completes with " + std::to_string(it->remaining)
				+ " Mb left");
		v->active.erase(it);

		if (l.time >= m_t0 && l.time < m_t1) {
			if (kind == data) m_result.data_bytes += l.size;
			else m_result.control_bytes += l.size;
		}
		auto r = rtt(l.src, l.dst);
		m_in_flight[{kind, l.src, l.dst, l.chunk}].push_back(l.time + r.value_or(0.0) / 2.0);
	}

	void on_recv(TraceLine const& l, Kind kind)
	{
		auto key = std::make_tuple(kind, l.src, l.dst, l.chunk);
		auto it = m_in_flight.find(key);
		if (it == m_in_flight.end() || it->second.empty()) {
			violation(Rule::causality, "arrival of a message that was never transmitted");
			return;
		}
		double const expected = it->second.front();
		it->second.pop_front();
		if (it->second.empty()) m_in_flight.erase(it);
		if (std::abs(l.time - expected) > m_opt.time_tolerance)
			violation(Rule::causality, "arrival " + std::to_string(l.time - expected)
				+ " s away from completion + rtt/2");
		if (kind != data) return;

		Node* r = node(l.dst);
		if (!r) return;
		expire(*r);
		bool const in_window = l.time >= m_t0 && l.time < m_t1;
		if (!r->ever.insert(l.chunk).second || l.chunk < lower_bound()) {
			if (in_window) m_result.duplicate_bytes += l.size;
			return;
		}
		r->held.insert(l.chunk);
		if (l.chunk >= m_cfg.first_measured() && l.chunk < m_cfg.end_measured()) ++m_result.in_time_deliveries;
		if (r->held.size() > static_cast<std::size_t>(m_cfg.buffer_capacity)) {
			m_evict_due = true;
			m_evict_node = l.dst;
		}
	}

	void check_pending_eviction(TraceLine const& l)
	{
		if (!m_evict_due) return;
		if (l.kind == "evict" && l.src == m_evict_node) return;
		violation(Rule::buffer, "node " + std::to_string(m_evict_node) + " exceeds its buffer capacity");
		m_evict_due = false;
	}

	void on_evict(TraceLine const& l)
	{
		Node* v = node(l.src);
		if (!v) return;
		if (!m_evict_due || m_evict_node != l.src)
			violation(Rule::buffer, "eviction without overflow at node " + std::to_string(l.src));
		else if (v->held.empty() || *v->held.begin() != l.chunk)
			violation(Rule::buffer, "evicted chunk is not the oldest one held");
		v->held.erase(l.chunk);
		m_evict_due = false;
	}

	bool close(double a, double b) const
	{
		return std::abs(a - b) <= m_opt.relative_tolerance * std::max({1.0, std::abs(a), std::abs(b)});
	}

	void reconcile(MetricsReport const& r)
	{
		double const norm = static_cast<double>(m_cfg.n) * (m_t1 - m_t0);
		std::int64_t const missed = r.chunks_eligible - m_result.in_time_deliveries;
		if (missed != r.chunks_missed)
			violation(Rule::conservation, "report misses " + std::to_string(r.chunks_missed)
				+ " chunks, trace shows " + std::to_string(missed));
		if (!close(r.control_rate, m_result.control_bytes / norm))
			violation(Rule::conservation, "control rate does not match the bytes in the trace");
		if (!close(r.throughput, (m_result.control_bytes + m_result.data_bytes) / norm))
			violation(Rule::conservation, "throughput does not match the bytes in the trace");
		if (!close(r.duplicate_data_rate, m_result.duplicate_bytes / norm))
			violation(Rule::conservation, "duplicate rate does not match the trace");
		if (!close(r.goodput, static_cast<double>(m_result.in_time_deliveries) * m_cfg.chunk_size / norm))
			violation(Rule::conservation, "goodput does not match the deliveries in the trace");
	}

	SimConfig m_cfg;
	TraceCheckOptions m_opt;
	double m_t0;
	double m_t1;
	double m_now = 0.0;
	long long m_newest = -1;
	std::vector<Node> m_nodes;
	std::map<std::pair<long long, long long>, double> m_rtt;
	std::map<std::tuple<Kind, long long, long long, long long>, std::deque<double>> m_in_flight;
	bool m_evict_due = false;
	long long m_evict_node = -1;
	TraceCheckResult m_result;
};

inline TraceCheckResult check_trace(std::istream& in, SimConfig const& config,
	MetricsReport const* report = nullptr, TraceCheckOptions opt = {})
{
	TraceChecker checker(config, opt);
	std::string line;
	std::size_t line_no = 0;
	while (std::getline(in, line)) {
		++line_no;
		if (line.empty()) continue;
		checker.feed(parse_trace_line(line, line_no), line_no);
	}
	return checker.finish(report);
}

} // namespace chunksim
