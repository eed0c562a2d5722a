#!/usr/bin/env python3
"""
Validation script to check project setup
Run this before a study to make sure dependencies, layout and the metric
itself behave as expected
"""
import sys
import os

# Add project root to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def check_python_version():
    """Check Python version"""
    version = sys.version_info
    print("🐍 Python Version Check...")
    if version.major >= 3 and version.minor >= 9:
        print(f"   ✅ Python {version.major}.{version.minor}.{version.micro} (OK)")
        return True
    else:
        print(f"   ❌ Python {version.major}.{version.minor}.{version.micro} (Need 3.9+)")
        return False


def check_dependencies():
    """Check required packages"""
    print("\n📦 Dependencies Check...")
    required = {
        'dotenv': 'Configuration files',
        'numpy': 'Arrays and seeded random generators',
        'scipy': 'Linear algebra, distributions and KDE',
        'pandas': 'CSV/JSON tables',
        'matplotlib': 'SVG plots',
    }

    all_ok = True
    for package, description in required.items():
        try:
            __import__(package)
            print(f"   ✅ {package} - {description}")
        except ImportError:
            print(f"   ❌ {package} - {description} (NOT INSTALLED)")
            all_ok = False

    return all_ok


def check_file_structure(root=None):
    """Check project file structure"""
    print("\n📁 File Structure Check...")
    root = root or os.path.dirname(os.path.abspath(__file__))

    required_files = {
        'src/config.py': 'Configuration module',
        'src/constants.py': 'Constants and enums',
        'src/utils.py': 'Utility functions',
        'src/ranking.py': 'Ranked lists and canonicalization',
        'src/metrics.py': 'Rank metrics',
        'src/stats.py': 'Statistics',
        'src/datasets.py': 'Synthetic datasets',
        'src/models.py': 'Model trainers',
        'src/explainers/lime.py': 'LIME explainer',
        'src/explainers/kernel_shap.py': 'KernelSHAP explainer',
        'src/study.py': 'Study pipeline',
        'src/reports.py': 'Report emission',
        'rankcheck.py': 'Command-line interface',
        'requirements.txt': 'Dependencies',
    }

    all_ok = True
    for file, description in required_files.items():
        if os.path.exists(os.path.join(root, file)):
            print(f"   ✅ {file} - {description}")
        else:
            print(f"   ❌ {file} - {description} (MISSING)")
            all_ok = False

    return all_ok


def check_worked_example():
    """Recompute the five-feature worked example"""
    print("\n🧮 Metric Check...")

    try:
        from src.metrics import d_max, shreyan_similarity, weighted_difference
        from src.ranking import Permutation

        r = Permutation((1, 2, 3, 4, 5))
        r_star = Permutation((2, 1, 3, 5, 4))
        checks = (
            ('d_max', d_max(5), 1.6),
            ('d', weighted_difference(r, r_star), 0.48),
            ('d_s', shreyan_similarity(r, r_star), 0.7),
        )
        all_ok = True
        for name, value, expected in checks:
            if abs(value - expected) < 1e-12:
                print(f"   ✅ {name} = {value:.4f}")
            else:
                print(f"   ❌ {name} = {value!r} (expected {expected})")
                all_ok = False
        return all_ok

    except Exception as e:
        print(f"   ❌ Metric error: {str(e)}")
        return False


def check_logs():
    """Check logging setup"""
    print("\n📝 Logging Check...")

    try:
        from src.config import LOG_FILE
        from src.utils import logger

        # Test log write
        logger.info("Validation script test log entry")

        if not LOG_FILE:
            print("   ✅ Logging configured - console only (RANKCHECK_LOG_FILE is empty)")
        elif os.path.exists(LOG_FILE):
            print(f"   ✅ Logging configured - {LOG_FILE} exists")
            size = os.path.getsize(LOG_FILE)
            print(f"   ℹ️  Log file size: {size} bytes")
        else:
            print(f"   ✅ Logging configured - {LOG_FILE} will be created")

        return True

    except Exception as e:
        print(f"   ❌ Logging error: {str(e)}")
        return False


def print_summary(results):
    """Print validation summary"""
    print("\n" + "="*60)
    print("VALIDATION SUMMARY")
    print("="*60)

    passed = sum(results.values())
    total = len(results)

    for check, result in results.items():
        status = "✅ PASS" if result else "❌ FAIL"
        print(f"{status} - {check}")

    print("="*60)
    print(f"Results: {passed}/{total} checks passed")

    if passed == total:
        print("\n🎉 All checks passed! You're ready to run studies.")
        print("\n📚 Next steps:")
        print("   1. Try: python rankcheck.py examples")
        print("   2. Compare two lists: python rankcheck.py distance 1,2,3,4,5 2,1,3,5,4")
        print("   3. Run a study: python rankcheck.py study --out-dir results")
        return True
    else:
        print("\n⚠️  Some checks failed. Please fix the issues above.")
        print("\n💡 Quick fixes:")
        if not results.get('Dependencies'):
            print("   • Install dependencies: pip install -r requirements.txt")
        return False


def main():
    """Run all validation checks"""
    print("\n" + "="*60)
    print("RANKCHECK - VALIDATION SCRIPT")
    print("="*60)

    results = {
        'Python Version': check_python_version(),
        'Dependencies': check_dependencies(),
        'File Structure': check_file_structure(),
        'Metric': check_worked_example(),
        'Logging': check_logs(),
    }

    success = print_summary(results)

    return 0 if success else 1


if __name__ == '__main__':
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\n⚠️  Validation cancelled by user\n")
        sys.exit(130)
    except Exception as e:
        print(f"\n❌ Unexpected error: {str(e)}\n")
        sys.exit(1)
