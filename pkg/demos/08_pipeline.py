"""End-to-end cached pipeline on the bundled synthetic corpus."""
import shutil
import tempfile
from importlib import resources
from pathlib import Path

from teamscope.pipeline import PipelineConfig, read_csv, run_pipeline

work = Path(tempfile.mkdtemp())
src = resources.files("teamscope") / "data" / "synthetic"
for name in ("papers.ndjson", "config.json"):
    shutil.copyfile(src / name, work / name)

cfg = PipelineConfig.from_file(work / "config.json")
first = run_pipeline(cfg)
for name, stage in first["stages"].items():
    print(f"  {name:28} {stage['seconds']:.3f}s")

second = run_pipeline(cfg)
print(f"\nsecond run skipped {sum(s['skipped'] for s in second['stages'].values())} "
      f"of {len(second['stages'])} stages")

rows = read_csv(work / "teamscope_out" / "metrics.csv")
print(f"metrics.csv: {len(rows)} papers, columns {list(rows[0])}")
print(f"outputs in {work / 'teamscope_out'}")
