"""Runtime settings, loaded from environment variables and an optional .env file."""

from __future__ import annotations

from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide knobs. Experiment parameters live in ExperimentConfig instead."""

    # Replicate worker pool (PASPECTRA_WORKERS)
    workers: int = 1

    # Artifact root; each run writes to <output_dir>/<experiment>-<config hash>
    output_dir: Path = Path(__file__).parent.parent / "runs"

    # Spectra
    dense_eigen_limit: int = 6000
    eigen_residual_tol: float = 1e-9
    lanczos_residual_tol: float = 1e-8
    power_max_iter: int = 20000
    walk_chunk_rows: int = 50000
    bigint_fallback_limit: int = 400

    # Combinatorial caps
    tree_vertex_cap: int = 10
    moment_order_cap: int = 12
    atlas_cap: int = 8
    census_max_vertices: int = 4
    census_max_edges: int = 5

    # Artifacts
    schema_version: str = "1"

    model_config = SettingsConfigDict(
        env_prefix="PASPECTRA_",
        env_file=str(Path(__file__).parent.parent / ".env"),
        env_file_encoding="utf-8",
        extra="ignore",
    )

    def model_post_init(self, __context) -> None:
        """Clamp values that would make the pool or caps meaningless."""
        if self.workers < 1:
            self.workers = 1
        if self.tree_vertex_cap > 10:
            # Prüfer enumeration beyond 10 vertices is 10^9+ trees
            self.tree_vertex_cap = 10


settings = Settings()
