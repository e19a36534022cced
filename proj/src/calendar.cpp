#include "dmdenkf/calendar.hpp"

#include <cstdio>
#include <stdexcept>

namespace dmdenkf {

// Days-from-civil conversion after Howard Hinnant's public-domain
// chrono-compatible algorithms.
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& year, int& month, int& day) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  year = static_cast<int>(y + (month <= 2));
}

namespace {

// 0 = Monday ... 6 = Sunday (day 0, 1970-01-01, was a Thursday).
int weekday_from_days(long z) {
  return static_cast<int>(z >= -3 ? (z + 3) % 7 : (z + 4) % 7 + 6);
}

}  // namespace

long iso_week_monday(int year, int week) {
  if (week < 1 || week > iso_weeks_in_year(year))
    throw std::invalid_argument("iso_week_monday: week " + std::to_string(week) +
                                " out of range for year " + std::to_string(year));
  // Week 1 is the week containing January 4th.
  const long jan4 = days_from_civil(year, 1, 4);
  const long week1_monday = jan4 - weekday_from_days(jan4);
  return week1_monday + 7L * (week - 1);
}

int iso_weeks_in_year(int year) {
  const long jan4 = days_from_civil(year, 1, 4);
  const long week1 = jan4 - weekday_from_days(jan4);
  const long jan4_next = days_from_civil(year + 1, 1, 4);
  const long week1_next = jan4_next - weekday_from_days(jan4_next);
  return static_cast<int>((week1_next - week1) / 7);
}

void iso_week_of_day(long days, int& iso_year, int& iso_week) {
  int y, m, d;
  civil_from_days(days, y, m, d);
  iso_year = y;
  long monday = iso_week_monday(iso_year, 1);
  if (days < monday) {
    --iso_year;
    monday = iso_week_monday(iso_year, 1);
  } else {
    const long next = days_from_civil(y + 1, 1, 4);
    const long next_week1 = next - weekday_from_days(next);
    if (days >= next_week1) {
      ++iso_year;
      monday = next_week1;
    }
  }
  iso_week = static_cast<int>((days - monday) / 7) + 1;
}

long parse_date(const std::string& text) {
  int y = 0, m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3 || m < 1 ||
      m > 12 || d < 1 || d > 31)
    throw std::invalid_argument("parse_date: malformed date '" + text + "'");
  return days_from_civil(y, m, d);
}

}  // namespace dmdenkf
