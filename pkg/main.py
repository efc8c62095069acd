import os
import sys

sys.dont_write_bytecode = True
os.environ['PYTHONDONTWRITEBYTECODE'] = '1'

from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from coherence.interfaces.rest.controllers.coherence_controller import router as coherence_router
from experiments.interfaces.rest.controllers.experiment_controller import router as experiment_router
from shared.domain.conventions import CONVENTION_HEADER
from shared.infrastructure.logging_config import configure_logging
from shared.infrastructure.settings import settings


@asynccontextmanager
async def lifespan(_app: FastAPI):
    """Eventos de inicio y cierre del ciclo de vida de la aplicación"""
    configure_logging(settings.LOG_LEVEL)
    print("=" * 60)
    print(f"Iniciando {settings.PROJECT_NAME} {settings.TOOL_VERSION}")
    print("=" * 60)
    print(f"Hilos de cómputo: {settings.THREADS}")
    print(f"Directorio de artefactos: {settings.OUTPUT_DIR}")
    print(f"Documentación: http://localhost:8000/docs")
    print("=" * 60 + "\n")

    yield

    print("\nApagando servidor...")


app = FastAPI(
    title=settings.PROJECT_NAME,
    openapi_url=f"{settings.API_V1_STR}/openapi.json",
    docs_url="/docs",
    redoc_url="/redoc",
    lifespan=lifespan,
)

# Configurar CORS
app.add_middleware(
    CORSMiddleware, # type: ignore
    allow_origins=settings.BACKEND_CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Incluir routers
app.include_router(experiment_router)
app.include_router(coherence_router)


# Endpoints
@app.get("/", tags=["Default Backend Status"])
async def root():
    """Endpoint raíz"""
    return {
        "service": settings.PROJECT_NAME,
        "version": settings.TOOL_VERSION,
        "status": "running",
        "conventions": CONVENTION_HEADER,
        "docs": "/docs"
    }


@app.get("/health", tags=["Default Backend Status"])
async def health():
    return {"status": "ok"}


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "main:app",
        host="0.0.0.0",
        port=8000,
        log_level="info"
    )
