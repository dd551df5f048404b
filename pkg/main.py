import uvicorn
from dotenv import load_dotenv
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from assembly.errors import RampError
from routes import plans, replays, reports, runs

load_dotenv()

app = FastAPI(title="ramp")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["http://localhost:8080"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

STATUS_BY_CODE = {"MISSING_FILE": 404, "IO_ERROR": 500, "UNKNOWN_GOAL": 404, "PATH_FORBIDDEN": 403}


@app.exception_handler(RampError)
async def ramp_error_handler(request: Request, error: RampError):
    return JSONResponse(
        status_code=STATUS_BY_CODE.get(error.code, 422),
        content={"code": error.code, "message": error.message},
    )


app.include_router(plans.router)
app.include_router(runs.router)
app.include_router(replays.router)
app.include_router(reports.router)

if __name__ == "__main__":
    uvicorn.run(app, host="0.0.0.0", port=8000)
