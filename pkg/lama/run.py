import os
import sys

# Add the project directory to Python path so the app package resolves
project_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.append(project_dir)

from app.api.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
