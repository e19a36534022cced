#pragma once

#include <string>

namespace dmdenkf {

// Serial day number for a civil date (days since 1970-01-01, negative
// before).  Proleptic Gregorian calendar.
long days_from_civil(int year, int month, int day);
void civil_from_days(long days, int& year, int& month, int& day);

// ISO-8601 week calendar: weeks start on Monday and week 1 contains
// January 4th.  Years have 52 or 53 ISO weeks.
int iso_weeks_in_year(int year);

// Serial day of the Monday starting ISO week `week` of ISO year `year`.
long iso_week_monday(int year, int week);

// ISO year and week of a serial day.
void iso_week_of_day(long days, int& iso_year, int& iso_week);

// Parse "YYYY-MM-DD"; throws std::invalid_argument on malformed input.
long parse_date(const std::string& text);

}  // namespace dmdenkf
