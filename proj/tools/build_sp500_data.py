#!/usr/bin/env python3
"""Rebuild the bundled S&P 500 daily close files under data/.

Sources (both redistributed inside PyPI packages):
  * Ecdat::SP500 via the `pydataset` sdist: daily log-returns, no dates.
    Dates are reconstructed from an NYSE holiday calendar and anchored on
    1987-10-19 (the -22.8% day); levels are anchored at the official close
    of 224.84 on that day.
  * arch.data.sp500 via the `arch` wheel: Yahoo daily closes 1999-2018.

Usage: build_sp500_data.py PYDATASET_SDIST ARCH_WHEEL OUTDIR
"""
import gzip
import io
import sys
import tarfile
import zipfile

import numpy as np
import pandas as pd
from pandas.tseries.holiday import (AbstractHolidayCalendar, GoodFriday, Holiday,
                                    USLaborDay, USMemorialDay, USPresidentsDay,
                                    USThanksgivingDay, nearest_workday)


class Nyse(AbstractHolidayCalendar):
    rules = [
        Holiday("NewYear", month=1, day=1, observance=nearest_workday),
        USPresidentsDay, GoodFriday, USMemorialDay,
        Holiday("July4", month=7, day=4, observance=nearest_workday),
        USLaborDay, USThanksgivingDay,
        Holiday("Christmas", month=12, day=25, observance=nearest_workday),
    ]


SPECIAL_CLOSURES = {pd.Timestamp("1980-11-04"), pd.Timestamp("1985-09-27")}


def ecdat_returns(sdist):
    with tarfile.open(sdist) as outer:
        member = next(m for m in outer.getmembers() if m.name.endswith("resources.tar.gz"))
        inner_bytes = outer.extractfile(member).read()
    with tarfile.open(fileobj=io.BytesIO(inner_bytes)) as inner:
        member = next(m for m in inner.getmembers()
                      if m.name.endswith("csv/Ecdat/SP500.csv") and "/._" not in m.name)
        return pd.read_csv(inner.extractfile(member))["r500"].to_numpy()


def main():
    sdist, wheel, outdir = sys.argv[1:4]

    r = ecdat_returns(sdist)
    holidays = set(Nyse().holidays(pd.Timestamp("1979-12-01"), pd.Timestamp("1992-12-31")))
    days = [d for d in pd.bdate_range("1980-01-01", "1992-06-30")
            if d not in holidays and d not in SPECIAL_CLOSURES]
    crash = days.index(pd.Timestamp("1987-10-19"))
    crash_row = int(np.argmin(r))
    start = crash - crash_row
    # r[k] is the log change from day k-1 to day k; the first row has no base.
    logp = np.concatenate([[0.0], np.cumsum(r[1:])])
    logp += np.log(224.84) - logp[crash_row]
    dates = days[start:start + len(r)]
    out = pd.DataFrame({"date": [d.strftime("%Y-%m-%d") for d in dates],
                        "close": np.round(np.exp(logp), 4)})
    out.to_csv(f"{outdir}/sp500_1980_1991.csv", index=False)

    with zipfile.ZipFile(wheel) as z:
        raw = gzip.decompress(z.read("arch/data/sp500/sp500.csv.gz"))
    df = pd.read_csv(io.BytesIO(raw))
    df["date"] = pd.to_datetime(df["Date"], format="%m/%d/%Y").dt.strftime("%Y-%m-%d")
    df[["date", "Close"]].rename(columns={"Close": "close"}).to_csv(
        f"{outdir}/sp500_1999_2018.csv", index=False, float_format="%.4f")


if __name__ == "__main__":
    main()
