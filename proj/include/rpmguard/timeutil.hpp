#pragma once

#include <cstdint>
#include <string>

namespace rpmguard {

// Seconds since the Unix epoch, UTC. Event logs carry second resolution.
using TimePoint = std::int64_t;
using Duration = std::int64_t;

// Parses a strict ISO-8601 UTC timestamp: "YYYY-MM-DDTHH:MM:SSZ".
// Throws ParseError on any other shape.
TimePoint parse_iso8601(const std::string& text);

// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(TimePoint t);

// Calendar date ("YYYY-MM-DD") of the UTC day containing t.
std::string utc_date(TimePoint t);

// Day of week for the UTC day containing t; 0 = Monday .. 6 = Sunday.
int utc_weekday(TimePoint t);

// Seconds elapsed since UTC midnight of the day containing t.
Duration seconds_into_day(TimePoint t);

}  // namespace rpmguard
