from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # API Settings
    API_V1_STR: str = "/api/v1"
    PROJECT_NAME: str = "Galilean Decoherence Lab"
    TOOL_VERSION: str = "1.0.0"

    # CORS
    BACKEND_CORS_ORIGINS: list = ["*"]

    # Logging
    LOG_LEVEL: str = "INFO"

    # Mallas de fase
    GRID_POINTS_1D: int = 512
    GRID_POINTS_2D: int = 64
    DEFAULT_HALF_WIDTH: float = 8.0
    MAX_WIDTH_DOUBLINGS: int = 4
    BOUNDARY_TOLERANCE: float = 1e-10

    # Cuadratura en coordenadas blanqueadas
    QUADRATURE_POINTS_1D: int = 512
    QUADRATURE_POINTS_2D: int = 32
    QUADRATURE_HALF_WIDTH: float = 8.0
    TILE_POINTS: int = 65536

    # Gauss-Legendre para la parte de saltos
    GAUSS_LEGENDRE_NODES: int = 64
    GAUSS_LEGENDRE_MAX_NODES: int = 4096
    GAUSS_LEGENDRE_RTOL: float = 1e-9

    # Monte Carlo
    MC_SAMPLES: int = 100_000
    MC_STEPS: int = 256
    MC_SEED: int = 20240601
    MC_BLOCK_SIZE: int = 10_000
    CLASSICAL_GRID_POINTS: int = 64

    # Paneles fijos de puntos (q, p)
    PANEL_SIZE: int = 20
    PANEL_SEED: int = 1729

    # Ejecución
    THREADS: int = 1
    OUTPUT_DIR: str = "runs"

    class Config:
        env_file = ".env"
        case_sensitive = True


settings = Settings()
