#pragma once

#include <stdexcept>
#include <string>

namespace chunksim {

// Base class for every error raised by the library.
struct Error : std::runtime_error
{
	using std::runtime_error::runtime_error;
};

struct InvalidConfig : Error
{
	InvalidConfig(std::string f, std::string r)
		: Error("invalid config field '" + f + "': " + r)
		, field(std::move(f))
		, reason(std::move(r))
	{}

	std::string field;
	std::string reason;
};

struct SourceUnreachable : Error
{
	explicit SourceUnreachable(int unreachable_count)
		: Error(std::to_string(unreachable_count) + " peer(s) unreachable from the source")
		, unreachable(unreachable_count)
	{}

	int unreachable;
};

struct BadMatrixFile : Error
{
	using Error::Error;
};

struct NotEnoughNeighbors : Error
{
	NotEnoughNeighbors(std::size_t wanted, std::size_t available)
		: Error("requested " + std::to_string(wanted) + " peers out of "
			+ std::to_string(available) + " neighbors")
	{}
};

struct ConfigUnsatisfiable : Error
{
	using Error::Error;
};

struct EmptyWindow : Error
{
	using Error::Error;
};

struct RangeNotBracketed : Error
{
	using Error::Error;
};

struct MalformedTrace : Error
{
	MalformedTrace(std::size_t line_no, std::string const& what)
		: Error("trace line " + std::to_string(line_no) + ": " + what)
		, line(line_no)
	{}

	std::size_t line;
};

} // namespace chunksim
